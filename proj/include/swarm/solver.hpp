#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "swarm/actuation.hpp"
#include "swarm/assembly.hpp"

namespace swarm {

/// Linear solve failure inside a time-stepping sweep.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int time_index)
      : std::runtime_error(what + " (time index " + std::to_string(time_index) + ")"),
        time_index_(time_index) {}
  int time_index() const { return time_index_; }

 private:
  int time_index_;
};

enum class LinearSolverKind { sparse_lu, bicgstab };

struct SolverOptions {
  LinearSolverKind kind = LinearSolverKind::sparse_lu;
  /// Relative residual every per-step system must reach.
  double rel_tol = 1e-10;
  int max_krylov_iters = 1000;
};

/// sum_k { u4 G4k + u1 G1k - u3 G3k - u2 G2k } with G = B + C + L.
SparseMatrix gamma_q(const OperatorSet& ops, std::span<const double> coeffs);

/// -sum_k { u4 B4k + u1 B1k - u3 B3k - u2 B2k }.
SparseMatrix gamma_p(const OperatorSet& ops, std::span<const double> coeffs);

struct StateTrajectory {
  double dt = 0.0;
  std::vector<Vector> q;  // q[0..N]

  int n_steps() const { return static_cast<int>(q.size()) - 1; }
  std::size_t stacked_size() const {
    return q.empty() ? 0 : q.size() * static_cast<std::size_t>(q.front().size());
  }
};

struct AdjointTrajectory {
  double dt = 0.0;
  /// Index of p.front(): 1 for the discrete adjoint, 0 for the
  /// continuous-then-discretized variant.
  int first = 1;
  std::vector<Vector> p;

  const Vector& at(int i) const { return p[static_cast<std::size_t>(i - first)]; }
  int last() const { return first + static_cast<int>(p.size()) - 1; }
  std::size_t stacked_size() const {
    return p.empty() ? 0 : p.size() * static_cast<std::size_t>(p.front().size());
  }
};

/// Crank–Nicolson forward sweep:
/// (M/dt + (A + Gq(u_{i+1}))/2) q_{i+1} = (M/dt - (A + Gq(u_i))/2) q_i.
StateTrajectory solve_forward(const OperatorSet& ops, const ControlTrajectory& ctrl,
                              const Vector& q0, const SolverOptions& opts = {});

/// Discrete adjoint of the forward sweep, p_1..p_N.
AdjointTrajectory solve_adjoint_dto(const OperatorSet& ops, const ControlTrajectory& ctrl,
                                    const StateTrajectory& state, const Vector& target,
                                    const SolverOptions& opts = {});

/// Crank–Nicolson discretization of the semi-discrete adjoint ODE, p_0..p_N,
/// with p_N = q_N - target.
AdjointTrajectory solve_adjoint_otd(const OperatorSet& ops, const ControlTrajectory& ctrl,
                                    const StateTrajectory& state, const Vector& target,
                                    const SolverOptions& opts = {});

/// Directional derivative of the forward sweep along `direction`.
StateTrajectory solve_tangent(const OperatorSet& ops, const ControlTrajectory& ctrl,
                              const StateTrajectory& state,
                              const ControlTrajectory& direction,
                              const SolverOptions& opts = {});

/// Transition matrices of the state recurrence, M/dt +- (A + Gq(u))/2.
SparseMatrix state_transition_plus(const OperatorSet& ops, std::span<const double> coeffs,
                                   double dt);
SparseMatrix state_transition_minus(const OperatorSet& ops, std::span<const double> coeffs,
                                    double dt);
/// Adjoint transition matrices, M/dt +- (A + Gp(u))/2.
SparseMatrix adjoint_transition_plus(const OperatorSet& ops, std::span<const double> coeffs,
                                     double dt);
SparseMatrix adjoint_transition_minus(const OperatorSet& ops,
                                      std::span<const double> coeffs, double dt);

}  // namespace swarm
