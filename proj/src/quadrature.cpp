#include "swarm/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace swarm {

LineRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  // Golub–Welsch on the Legendre Jacobi matrix.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    J(i, i - 1) = b;
    J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  LineRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = eig.eigenvalues()(i);
    const double v0 = eig.eigenvectors()(0, i);
    rule.points[i] = 0.5 * (x + 1.0);
    rule.weights[i] = v0 * v0;  // 2 v0^2 on [-1,1], halved on [0,1]
  }
  return rule;
}

TriangleRule collapsed_gauss_triangle(int n) {
  const LineRule g = gauss_legendre(n);
  TriangleRule rule;
  rule.xi.reserve(n * n);
  rule.eta.reserve(n * n);
  rule.weights.reserve(n * n);
  for (int a = 0; a < n; ++a) {
    const double u = g.points[a];
    for (int b = 0; b < n; ++b) {
      const double v = g.points[b];
      rule.xi.push_back(u);
      rule.eta.push_back(v * (1.0 - u));
      rule.weights.push_back(g.weights[a] * g.weights[b] * (1.0 - u));
    }
  }
  return rule;
}

}  // namespace swarm
