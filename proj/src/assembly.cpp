#include "swarm/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "swarm/quadrature.hpp"

namespace swarm {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

struct ElementGeometry {
  std::array<Point, 3> vertices;
  double area = 0.0;
  // grad[a] is the constant gradient of the barycentric coordinate a.
  std::array<std::array<double, 2>, 3> grad{};
};

ElementGeometry element_geometry(const Mesh& mesh, std::size_t t) {
  ElementGeometry g;
  const auto& tri = mesh.triangles[t];
  for (int a = 0; a < 3; ++a) g.vertices[a] = mesh.nodes[tri[a]];
  const Point& p0 = g.vertices[0];
  const Point& p1 = g.vertices[1];
  const Point& p2 = g.vertices[2];
  const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  g.area = 0.5 * det;
  g.grad[0] = {(p1.y - p2.y) / det, (p2.x - p1.x) / det};
  g.grad[1] = {(p2.y - p0.y) / det, (p0.x - p2.x) / det};
  g.grad[2] = {(p0.y - p1.y) / det, (p1.x - p0.x) / det};
  return g;
}

Point map_to_element(const ElementGeometry& g, double xi, double eta) {
  const Point& p0 = g.vertices[0];
  const Point& p1 = g.vertices[1];
  const Point& p2 = g.vertices[2];
  return {p0.x + xi * (p1.x - p0.x) + eta * (p2.x - p0.x),
          p0.y + xi * (p1.y - p0.y) + eta * (p2.y - p0.y)};
}

std::array<double, 2> outward_normal(Side side) {
  switch (side) {
    case Side::bottom: return {0.0, -1.0};
    case Side::right: return {1.0, 0.0};
    case Side::top: return {0.0, 1.0};
    case Side::left: return {-1.0, 0.0};
  }
  return {0.0, 0.0};
}

// Zero-valued entries for every element node pair so that all matrices end up
// with the same compressed pattern.
void add_pattern(const Mesh& mesh, Triplets& trip) {
  for (const auto& tri : mesh.triangles) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) trip.emplace_back(tri[a], tri[b], 0.0);
    }
  }
}

SparseMatrix from_triplets(Eigen::Index n, const Triplets& trip) {
  SparseMatrix m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

void validate_mesh(const Mesh& mesh) {
  if (mesh.n_nodes() == 0 || mesh.n_triangles() == 0) {
    throw std::invalid_argument("assembly: empty mesh");
  }
}

void validate_order(int quad_order) {
  if (quad_order < 2) {
    throw std::invalid_argument("assembly: quad_order must be >= 2 (got " +
                                std::to_string(quad_order) + ")");
  }
}

}  // namespace

OperatorSet assemble_operators(const Mesh& mesh, const ControlBasis& basis,
                               const ActuatorModel& model, const AssemblyOptions& opts) {
  validate_mesh(mesh);
  validate_order(opts.quad_order);
  if (!(opts.mu > 0.0)) {
    throw std::invalid_argument("assemble_operators: mu must be > 0");
  }
  if (basis.size() < 1) throw std::invalid_argument("assemble_operators: empty control basis");

  const auto n = static_cast<Eigen::Index>(mesh.n_nodes());
  const int nb = basis.size();
  const TriangleRule tri_rule = collapsed_gauss_triangle(opts.quad_order);
  const LineRule edge_rule = gauss_legendre(opts.quad_order);

  Triplets m_trip, a_trip;
  std::array<std::vector<Triplets>, 4> b_trip, c_trip, l_trip;
  for (int s = 0; s < 4; ++s) {
    b_trip[s].resize(nb);
    c_trip[s].resize(nb);
    l_trip[s].resize(nb);
  }

  for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double mass = g.area / 12.0 * (i == j ? 2.0 : 1.0);
        const double stiff =
            opts.mu * g.area * (g.grad[i][0] * g.grad[j][0] + g.grad[i][1] * g.grad[j][1]);
        m_trip.emplace_back(tri[i], tri[j], mass);
        a_trip.emplace_back(tri[i], tri[j], stiff);
      }
    }

    for (Side side : kAllSides) {
      const int s = side_index(side);
      const int d = push_axis(side);
      for (int k = 0; k < nb; ++k) {
        std::array<std::array<double, 3>, 3> bl{}, cl{};
        for (std::size_t q = 0; q < tri_rule.weights.size(); ++q) {
          const double xi = tri_rule.xi[q];
          const double eta = tri_rule.eta[q];
          const std::array<double, 3> phi{1.0 - xi - eta, xi, eta};
          const Point x = map_to_element(g, xi, eta);
          const double w = 2.0 * g.area * tri_rule.weights[q];
          const double psi = basis.eval(k, tangential(side, x));
          const double weight = psi * model.profile(side, x);
          const double slope = psi * model.profile_slope(side, x);
          for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
              bl[i][j] += w * weight * g.grad[j][d] * phi[i];
              cl[i][j] += w * slope * phi[j] * phi[i];
            }
          }
        }
        for (int i = 0; i < 3; ++i) {
          for (int j = 0; j < 3; ++j) {
            b_trip[s][k].emplace_back(tri[i], tri[j], bl[i][j]);
            c_trip[s][k].emplace_back(tri[i], tri[j], cl[i][j]);
          }
        }
      }
    }
  }

  for (const BoundaryEdge& e : mesh.boundary_edges) {
    const Point& p0 = mesh.nodes[e.nodes[0]];
    const Point& p1 = mesh.nodes[e.nodes[1]];
    const double len = std::hypot(p1.x - p0.x, p1.y - p0.y);
    const auto normal = outward_normal(e.side);
    for (Side side : kAllSides) {
      const int s = side_index(side);
      const double nd = normal[push_axis(side)];
      if (nd == 0.0) continue;
      for (int k = 0; k < nb; ++k) {
        std::array<std::array<double, 2>, 2> ll{};
        for (std::size_t q = 0; q < edge_rule.points.size(); ++q) {
          const double r = edge_rule.points[q];
          const std::array<double, 2> phi{1.0 - r, r};
          const Point x{p0.x + r * (p1.x - p0.x), p0.y + r * (p1.y - p0.y)};
          const double weight = basis.eval(k, tangential(side, x)) * model.profile(side, x);
          const double w = len * edge_rule.weights[q];
          for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) ll[i][j] -= w * weight * phi[i] * phi[j] * nd;
          }
        }
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < 2; ++j) {
            l_trip[s][k].emplace_back(e.nodes[i], e.nodes[j], ll[i][j]);
          }
        }
      }
    }
  }

  OperatorSet ops;
  ops.mu = opts.mu;
  ops.n_basis = nb;
  ops.M = from_triplets(n, m_trip);
  ops.A = from_triplets(n, a_trip);
  for (int s = 0; s < 4; ++s) {
    ops.B[s].reserve(nb);
    ops.C[s].reserve(nb);
    ops.L[s].reserve(nb);
    ops.G[s].reserve(nb);
    for (int k = 0; k < nb; ++k) {
      add_pattern(mesh, l_trip[s][k]);
      ops.B[s].push_back(from_triplets(n, b_trip[s][k]));
      ops.C[s].push_back(from_triplets(n, c_trip[s][k]));
      ops.L[s].push_back(from_triplets(n, l_trip[s][k]));
      SparseMatrix g = ops.B[s][k];
      Eigen::Map<Vector>(g.valuePtr(), g.nonZeros()) +=
          Eigen::Map<const Vector>(ops.C[s][k].valuePtr(), g.nonZeros()) +
          Eigen::Map<const Vector>(ops.L[s][k].valuePtr(), g.nonZeros());
      ops.G[s].push_back(std::move(g));
    }
  }
  return ops;
}

SparseMatrix assemble_mass_quadrature(const Mesh& mesh, int quad_order) {
  validate_mesh(mesh);
  validate_order(quad_order);
  const TriangleRule rule = collapsed_gauss_triangle(quad_order);
  Triplets trip;
  for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    const auto& tri = mesh.triangles[t];
    std::array<std::array<double, 3>, 3> local{};
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const std::array<double, 3> phi{1.0 - rule.xi[q] - rule.eta[q], rule.xi[q], rule.eta[q]};
      const double w = 2.0 * g.area * rule.weights[q];
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) local[i][j] += w * phi[i] * phi[j];
      }
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], local[i][j]);
    }
  }
  return from_triplets(static_cast<Eigen::Index>(mesh.n_nodes()), trip);
}

SparseMatrix assemble_diffusion_quadrature(const Mesh& mesh, double mu, int quad_order) {
  validate_mesh(mesh);
  validate_order(quad_order);
  const TriangleRule rule = collapsed_gauss_triangle(quad_order);
  Triplets trip;
  for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    const auto& tri = mesh.triangles[t];
    double wsum = 0.0;
    for (double w : rule.weights) wsum += 2.0 * g.area * w;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double gg = g.grad[i][0] * g.grad[j][0] + g.grad[i][1] * g.grad[j][1];
        trip.emplace_back(tri[i], tri[j], mu * wsum * gg);
      }
    }
  }
  return from_triplets(static_cast<Eigen::Index>(mesh.n_nodes()), trip);
}

double max_abs(const SparseMatrix& m) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < m.nonZeros(); ++i) {
    best = std::max(best, std::abs(m.valuePtr()[i]));
  }
  return best;
}

double bcl_residual(const OperatorSet& ops, Side side, int k) {
  const int s = side_index(side);
  const SparseMatrix bt = ops.B[s][k].transpose();
  const SparseMatrix r = ops.B[s][k] + bt + ops.C[s][k] + ops.L[s][k];
  return max_abs(r);
}

double conservation_defect(const OperatorSet& ops, Side side, int k) {
  const Vector ones = Vector::Ones(ops.n_nodes());
  const Vector col = ops.G[side_index(side)][k].transpose() * ones;
  return col.cwiseAbs().maxCoeff();
}

double total_mass(const SparseMatrix& M, const Vector& q) {
  return Vector::Ones(M.rows()).dot(M * q);
}

Vector project_density(const Mesh& mesh, const SparseMatrix& M,
                       const std::function<double(Point)>& f) {
  if (static_cast<Eigen::Index>(mesh.n_nodes()) != M.rows()) {
    throw std::invalid_argument("project_density: mass matrix does not match mesh");
  }
  Vector q(static_cast<Eigen::Index>(mesh.n_nodes()));
  for (std::size_t i = 0; i < mesh.n_nodes(); ++i) {
    const double v = f(mesh.nodes[i]);
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("project_density: density must be finite and nonnegative");
    }
    q[static_cast<Eigen::Index>(i)] = v;
  }
  const double mass = total_mass(M, q);
  if (!(mass > 0.0)) {
    throw std::invalid_argument("project_density: density interpolates to zero");
  }
  return q / mass;
}

void write_coordinate(const SparseMatrix& m, std::ostream& os) {
  os.precision(17);
  for (int col = 0; col < m.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
}

}  // namespace swarm
