#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace swarm {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Actuator / boundary side of the unit square.
/// Bottom is {y=0}, right is {x=1}, top is {y=1}, left is {x=0}.
enum class Side : int { bottom = 1, right = 2, top = 3, left = 4 };

inline constexpr std::array<Side, 4> kAllSides = {Side::bottom, Side::right,
                                                  Side::top, Side::left};

inline constexpr int side_index(Side s) { return static_cast<int>(s) - 1; }

struct BoundaryEdge {
  std::array<int, 2> nodes;
  Side side;
};

/// P1 triangulation of the unit square on a structured nx-by-ny grid.
/// Each grid cell is split along its bottom-left to top-right diagonal and
/// triangles are stored counter-clockwise.
struct Mesh {
  int nx = 0;
  int ny = 0;
  std::vector<Point> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;

  std::size_t n_nodes() const { return nodes.size(); }
  std::size_t n_triangles() const { return triangles.size(); }

  int node_index(int i, int j) const { return j * (nx + 1) + i; }

  double signed_area(std::size_t tri) const;

  /// Evaluate a P1 field at a point of the closed unit square.
  double evaluate(std::span<const double> nodal, Point p) const;
};

Mesh build_structured_mesh(int nx, int ny);

/// Writes two CSV tables: "node,x,y" and "triangle,n0,n1,n2".
void write_nodes_csv(const Mesh& mesh, std::ostream& os);
void write_triangles_csv(const Mesh& mesh, std::ostream& os);

}  // namespace swarm
