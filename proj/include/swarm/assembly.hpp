#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

#include "swarm/actuation.hpp"
#include "swarm/mesh.hpp"

namespace swarm {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Control-independent FEM operators. Every matrix shares the sparsity
/// pattern of the P1 node adjacency graph, so linear combinations reduce to
/// combinations of the value arrays.
struct OperatorSet {
  SparseMatrix M;
  SparseMatrix A;
  /// Indexed [side_index(a)][k].
  std::array<std::vector<SparseMatrix>, 4> B;
  std::array<std::vector<SparseMatrix>, 4> C;
  std::array<std::vector<SparseMatrix>, 4> L;
  /// B + C + L, the per-coefficient blocks of the state matrix.
  std::array<std::vector<SparseMatrix>, 4> G;
  double mu = 0.0;
  int n_basis = 0;

  Eigen::Index n_nodes() const { return M.rows(); }
};

struct AssemblyOptions {
  double mu = 0.1;
  /// Gauss points per direction on triangles and per edge.
  int quad_order = 4;
};

OperatorSet assemble_operators(const Mesh& mesh, const ControlBasis& basis,
                               const ActuatorModel& model, const AssemblyOptions& opts);

/// Mass and diffusion matrices by quadrature (the operator set uses the
/// closed-form P1 element matrices).
SparseMatrix assemble_mass_quadrature(const Mesh& mesh, int quad_order);
SparseMatrix assemble_diffusion_quadrature(const Mesh& mesh, double mu, int quad_order);

/// max |B + B^T + C + L| for one side/basis pair.
double bcl_residual(const OperatorSet& ops, Side side, int k);

/// max_j |sum_i G_{ij}|, the discrete divergence-theorem defect.
double conservation_defect(const OperatorSet& ops, Side side, int k);

/// Max absolute entry of a sparse matrix.
double max_abs(const SparseMatrix& m);

/// Nodal interpolation of f rescaled to unit mass 1^T M q = 1.
Vector project_density(const Mesh& mesh, const SparseMatrix& M,
                       const std::function<double(Point)>& f);

/// Total mass 1^T M q.
double total_mass(const SparseMatrix& M, const Vector& q);

/// "row col value" lines, 0-based, one stored entry per line.
void write_coordinate(const SparseMatrix& m, std::ostream& os);

}  // namespace swarm
