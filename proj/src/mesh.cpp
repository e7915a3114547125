#include "swarm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace swarm {

double Mesh::signed_area(std::size_t tri) const {
  const auto& t = triangles[tri];
  const Point& a = nodes[t[0]];
  const Point& b = nodes[t[1]];
  const Point& c = nodes[t[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double Mesh::evaluate(std::span<const double> nodal, Point p) const {
  if (nodal.size() != n_nodes()) {
    throw std::invalid_argument("Mesh::evaluate: nodal vector has " +
                                std::to_string(nodal.size()) + " entries, mesh has " +
                                std::to_string(n_nodes()) + " nodes");
  }
  if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0)) {
    throw std::out_of_range("Mesh::evaluate: point outside the unit square");
  }
  const double sx = p.x * nx;
  const double sy = p.y * ny;
  const int i = std::min(static_cast<int>(sx), nx - 1);
  const int j = std::min(static_cast<int>(sy), ny - 1);
  const double fx = sx - i;
  const double fy = sy - j;
  const double v00 = nodal[node_index(i, j)];
  const double v10 = nodal[node_index(i + 1, j)];
  const double v01 = nodal[node_index(i, j + 1)];
  const double v11 = nodal[node_index(i + 1, j + 1)];
  // Lower-right triangle (00,10,11) when fx >= fy, upper-left (00,11,01) otherwise.
  if (fx >= fy) {
    return v00 + fx * (v10 - v00) + fy * (v11 - v10);
  }
  return v00 + fy * (v01 - v00) + fx * (v11 - v01);
}

Mesh build_structured_mesh(int nx, int ny) {
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument("build_structured_mesh: nx and ny must be >= 1 (got " +
                                std::to_string(nx) + ", " + std::to_string(ny) + ")");
  }
  Mesh m;
  m.nx = nx;
  m.ny = ny;
  m.nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      m.nodes.push_back({static_cast<double>(i) / nx, static_cast<double>(j) / ny});
    }
  }

  m.triangles.reserve(2 * static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int n00 = m.node_index(i, j);
      const int n10 = m.node_index(i + 1, j);
      const int n01 = m.node_index(i, j + 1);
      const int n11 = m.node_index(i + 1, j + 1);
      m.triangles.push_back({n00, n10, n11});
      m.triangles.push_back({n00, n11, n01});
    }
  }

  m.boundary_edges.reserve(2 * static_cast<std::size_t>(nx + ny));
  for (int i = 0; i < nx; ++i) {
    m.boundary_edges.push_back({{m.node_index(i, 0), m.node_index(i + 1, 0)}, Side::bottom});
  }
  for (int j = 0; j < ny; ++j) {
    m.boundary_edges.push_back({{m.node_index(nx, j), m.node_index(nx, j + 1)}, Side::right});
  }
  for (int i = nx; i > 0; --i) {
    m.boundary_edges.push_back({{m.node_index(i, ny), m.node_index(i - 1, ny)}, Side::top});
  }
  for (int j = ny; j > 0; --j) {
    m.boundary_edges.push_back({{m.node_index(0, j), m.node_index(0, j - 1)}, Side::left});
  }
  return m;
}

void write_nodes_csv(const Mesh& mesh, std::ostream& os) {
  os << "node,x,y\n";
  os.precision(17);
  for (std::size_t n = 0; n < mesh.n_nodes(); ++n) {
    os << n << ',' << mesh.nodes[n].x << ',' << mesh.nodes[n].y << '\n';
  }
}

void write_triangles_csv(const Mesh& mesh, std::ostream& os) {
  os << "triangle,n0,n1,n2\n";
  for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    os << t << ',' << tri[0] << ',' << tri[1] << ',' << tri[2] << '\n';
  }
}

}  // namespace swarm
