#include "swarm/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <memory>

namespace swarm {

namespace {

// out += c * m; both must share the operator pattern.
void accumulate(SparseMatrix& out, const SparseMatrix& m, double c) {
  if (out.nonZeros() != m.nonZeros()) {
    throw std::logic_error("accumulate: operator patterns differ");
  }
  Eigen::Map<Vector>(out.valuePtr(), out.nonZeros()) +=
      c * Eigen::Map<const Vector>(m.valuePtr(), m.nonZeros());
}

void check_coeffs(const OperatorSet& ops, std::span<const double> coeffs) {
  if (coeffs.size() != 4 * static_cast<std::size_t>(ops.n_basis)) {
    throw std::invalid_argument("control instant has " + std::to_string(coeffs.size()) +
                                " coefficients, operators expect " +
                                std::to_string(4 * ops.n_basis));
  }
}

SparseMatrix zero_like(const SparseMatrix& pattern) {
  SparseMatrix z = pattern;
  Eigen::Map<Vector>(z.valuePtr(), z.nonZeros()).setZero();
  return z;
}

SparseMatrix combine_blocks(const OperatorSet& ops,
                            const std::array<std::vector<SparseMatrix>, 4>& blocks,
                            std::span<const double> coeffs, double overall) {
  check_coeffs(ops, coeffs);
  SparseMatrix out = zero_like(ops.M);
  for (Side side : kAllSides) {
    const int s = side_index(side);
    for (int k = 0; k < ops.n_basis; ++k) {
      const double u = coeffs[static_cast<std::size_t>(s) * ops.n_basis + k];
      if (u != 0.0) accumulate(out, blocks[s][k], overall * push_sign(side) * u);
    }
  }
  return out;
}

// M/dt + sign * (A + gamma)/2.
SparseMatrix transition(const OperatorSet& ops, const SparseMatrix& gamma, double dt,
                        double sign) {
  SparseMatrix out = ops.M;
  Eigen::Map<Vector>(out.valuePtr(), out.nonZeros()) /= dt;
  accumulate(out, ops.A, 0.5 * sign);
  accumulate(out, gamma, 0.5 * sign);
  return out;
}

class FixedPartPreconditioner {
 public:
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic };

  FixedPartPreconditioner() = default;
  template <typename MatType>
  explicit FixedPartPreconditioner(const MatType&) {}
  template <typename MatType>
  FixedPartPreconditioner& analyzePattern(const MatType&) { return *this; }
  template <typename MatType>
  FixedPartPreconditioner& factorize(const MatType&) { return *this; }
  template <typename MatType>
  FixedPartPreconditioner& compute(const MatType&) { return *this; }

  void set(const Eigen::SimplicialLDLT<SparseMatrix>* factor) { factor_ = factor; }

  template <typename Rhs>
  Vector solve(const Rhs& b) const { return factor_->solve(Vector(b)); }

  Eigen::ComputationInfo info() const { return Eigen::Success; }

 private:
  const Eigen::SimplicialLDLT<SparseMatrix>* factor_ = nullptr;
};

/// Per-step linear solver; the symbolic analysis (or the preconditioner of
/// the control-independent part) is computed once per sweep.
class StepSolver {
 public:
  StepSolver(const OperatorSet& ops, double dt, const SolverOptions& opts) : opts_(opts) {
    if (opts_.kind == LinearSolverKind::bicgstab) {
      SparseMatrix fixed = ops.M / dt;
      fixed += 0.5 * ops.A;
      ldlt_ = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>(fixed);
    }
  }

  Vector solve(const SparseMatrix& a, const Vector& b, int time_index) {
    const double bnorm = b.norm();
    if (bnorm == 0.0) return Vector::Zero(b.size());
    Vector x;
    if (opts_.kind == LinearSolverKind::sparse_lu) {
      if (!analyzed_) {
        lu_.analyzePattern(a);
        analyzed_ = true;
      }
      lu_.factorize(a);
      if (lu_.info() != Eigen::Success) {
        throw SolverError("sparse LU factorization failed: " + lu_.lastErrorMessage(),
                          time_index);
      }
      x = lu_.solve(b);
      Vector r = b - a * x;
      if (r.norm() > opts_.rel_tol * bnorm) {
        x += lu_.solve(r);  // one step of iterative refinement
        r = b - a * x;
      }
      if (!(r.norm() <= opts_.rel_tol * bnorm)) {
        throw SolverError("linear solve did not reach relative residual " +
                              std::to_string(opts_.rel_tol),
                          time_index);
      }
    } else {
      Eigen::BiCGSTAB<SparseMatrix, FixedPartPreconditioner> it;
      it.preconditioner().set(ldlt_.get());
      it.setTolerance(opts_.rel_tol);
      it.setMaxIterations(opts_.max_krylov_iters);
      it.compute(a);
      x = it.solve(b);
      if (it.info() != Eigen::Success || !((b - a * x).norm() <= opts_.rel_tol * bnorm * 1.01)) {
        throw SolverError("BiCGSTAB did not converge", time_index);
      }
    }
    return x;
  }

 private:
  SolverOptions opts_;
  Eigen::SparseLU<SparseMatrix> lu_;
  bool analyzed_ = false;
  std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>> ldlt_;
};

void check_trajectory(const OperatorSet& ops, const ControlTrajectory& ctrl) {
  if (ctrl.n_basis() != ops.n_basis) {
    throw std::invalid_argument("control has " + std::to_string(ctrl.n_basis()) +
                                " basis functions, operators have " +
                                std::to_string(ops.n_basis));
  }
}

void check_vector(const OperatorSet& ops, const Vector& v, const char* what) {
  if (v.size() != ops.n_nodes()) {
    throw std::invalid_argument(std::string(what) + " has " + std::to_string(v.size()) +
                                " entries, mesh has " + std::to_string(ops.n_nodes()) +
                                " nodes");
  }
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + " has non-finite entries");
}

void check_state(const ControlTrajectory& ctrl, const StateTrajectory& state) {
  if (state.n_steps() != ctrl.n_steps()) {
    throw std::invalid_argument("state trajectory and control have different step counts");
  }
}

}  // namespace

SparseMatrix gamma_q(const OperatorSet& ops, std::span<const double> coeffs) {
  return combine_blocks(ops, ops.G, coeffs, 1.0);
}

SparseMatrix gamma_p(const OperatorSet& ops, std::span<const double> coeffs) {
  return combine_blocks(ops, ops.B, coeffs, -1.0);
}

SparseMatrix state_transition_plus(const OperatorSet& ops, std::span<const double> coeffs,
                                   double dt) {
  return transition(ops, gamma_q(ops, coeffs), dt, 1.0);
}

SparseMatrix state_transition_minus(const OperatorSet& ops, std::span<const double> coeffs,
                                    double dt) {
  return transition(ops, gamma_q(ops, coeffs), dt, -1.0);
}

SparseMatrix adjoint_transition_plus(const OperatorSet& ops, std::span<const double> coeffs,
                                     double dt) {
  return transition(ops, gamma_p(ops, coeffs), dt, 1.0);
}

SparseMatrix adjoint_transition_minus(const OperatorSet& ops,
                                      std::span<const double> coeffs, double dt) {
  return transition(ops, gamma_p(ops, coeffs), dt, -1.0);
}

StateTrajectory solve_forward(const OperatorSet& ops, const ControlTrajectory& ctrl,
                              const Vector& q0, const SolverOptions& opts) {
  check_trajectory(ops, ctrl);
  check_vector(ops, q0, "initial density");
  const double dt = ctrl.dt();
  const int n = ctrl.n_steps();
  StateTrajectory out;
  out.dt = dt;
  out.q.reserve(n + 1);
  out.q.push_back(q0);

  StepSolver solver(ops, dt, opts);
  SparseMatrix g_now = gamma_q(ops, ctrl.instant(0));
  for (int i = 0; i < n; ++i) {
    SparseMatrix g_next = gamma_q(ops, ctrl.instant(i + 1));
    const Vector rhs = transition(ops, g_now, dt, -1.0) * out.q[i];
    out.q.push_back(solver.solve(transition(ops, g_next, dt, 1.0), rhs, i + 1));
    g_now = std::move(g_next);
  }
  return out;
}

AdjointTrajectory solve_adjoint_dto(const OperatorSet& ops, const ControlTrajectory& ctrl,
                                    const StateTrajectory& state, const Vector& target,
                                    const SolverOptions& opts) {
  check_trajectory(ops, ctrl);
  check_state(ctrl, state);
  check_vector(ops, target, "target density");
  const double dt = ctrl.dt();
  const int n = ctrl.n_steps();
  AdjointTrajectory out;
  out.dt = dt;
  out.first = 1;
  out.p.assign(n, Vector());

  StepSolver solver(ops, dt, opts);
  SparseMatrix g = gamma_q(ops, ctrl.instant(n));
  SparseMatrix plus_t = transition(ops, g, dt, 1.0).transpose();
  const Vector terminal = ops.M * (state.q[n] - target) / dt;
  out.p[n - 1] = solver.solve(plus_t, terminal, n);
  for (int i = n - 1; i >= 1; --i) {
    g = gamma_q(ops, ctrl.instant(i));
    plus_t = transition(ops, g, dt, 1.0).transpose();
    const SparseMatrix minus_t = transition(ops, g, dt, -1.0).transpose();
    out.p[i - 1] = solver.solve(plus_t, minus_t * out.p[i], i);
  }
  return out;
}

AdjointTrajectory solve_adjoint_otd(const OperatorSet& ops, const ControlTrajectory& ctrl,
                                    const StateTrajectory& state, const Vector& target,
                                    const SolverOptions& opts) {
  check_trajectory(ops, ctrl);
  check_state(ctrl, state);
  check_vector(ops, target, "target density");
  const double dt = ctrl.dt();
  const int n = ctrl.n_steps();
  AdjointTrajectory out;
  out.dt = dt;
  out.first = 0;
  out.p.assign(n + 1, Vector());
  out.p[n] = state.q[n] - target;

  StepSolver solver(ops, dt, opts);
  SparseMatrix g_next = gamma_p(ops, ctrl.instant(n));
  for (int i = n - 1; i >= 0; --i) {
    SparseMatrix g_now = gamma_p(ops, ctrl.instant(i));
    const Vector rhs = transition(ops, g_next, dt, -1.0) * out.p[i + 1];
    out.p[i] = solver.solve(transition(ops, g_now, dt, 1.0), rhs, i);
    g_next = std::move(g_now);
  }
  return out;
}

StateTrajectory solve_tangent(const OperatorSet& ops, const ControlTrajectory& ctrl,
                              const StateTrajectory& state,
                              const ControlTrajectory& direction, const SolverOptions& opts) {
  check_trajectory(ops, ctrl);
  check_trajectory(ops, direction);
  check_state(ctrl, state);
  if (direction.n_steps() != ctrl.n_steps()) {
    throw std::invalid_argument("tangent direction and control have different step counts");
  }
  const double dt = ctrl.dt();
  const int n = ctrl.n_steps();
  StateTrajectory out;
  out.dt = dt;
  out.q.reserve(n + 1);
  out.q.push_back(Vector::Zero(ops.n_nodes()));

  StepSolver solver(ops, dt, opts);
  SparseMatrix g_now = gamma_q(ops, ctrl.instant(0));
  Vector forcing_now = gamma_q(ops, direction.instant(0)) * state.q[0];
  for (int i = 0; i < n; ++i) {
    SparseMatrix g_next = gamma_q(ops, ctrl.instant(i + 1));
    Vector forcing_next = gamma_q(ops, direction.instant(i + 1)) * state.q[i + 1];
    const Vector rhs =
        transition(ops, g_now, dt, -1.0) * out.q[i] - 0.5 * (forcing_next + forcing_now);
    out.q.push_back(solver.solve(transition(ops, g_next, dt, 1.0), rhs, i + 1));
    g_now = std::move(g_next);
    forcing_now = std::move(forcing_next);
  }
  return out;
}

}  // namespace swarm
