#pragma once

#include <vector>

namespace swarm {

/// Gauss–Legendre rule mapped to [0,1]; exact for polynomials of degree 2n-1.
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
};

/// Rule on the reference triangle {(0,0),(1,0),(0,1)}; weights sum to 1/2.
struct TriangleRule {
  std::vector<double> xi;
  std::vector<double> eta;
  std::vector<double> weights;
};

LineRule gauss_legendre(int n);

/// Collapsed (Duffy) tensor-product Gauss rule with n points per direction.
/// Exact for polynomials of total degree 2n-2 on the triangle.
TriangleRule collapsed_gauss_triangle(int n);

}  // namespace swarm
