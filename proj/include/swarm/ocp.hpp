#pragma once

#include <functional>
#include <vector>

#include "swarm/solver.hpp"

namespace swarm {

struct CostBreakdown {
  double terminal = 0.0;  // 1/2 (q_N - qT)^T M (q_N - qT)
  double control = 0.0;   // trapezoid-in-time alpha/2 sum |u_i|^2
  double total = 0.0;
};

CostBreakdown cost(const OperatorSet& ops, const ControlTrajectory& ctrl,
                   const StateTrajectory& state, const Vector& target, double alpha);

/// How the state-matrix derivative is paired with state and adjoint.
/// `full` differentiates the discrete Lagrangian with G = B + C + L as
/// assembled; `transport` substitutes G^T = -B, which is exact only when the
/// B/C/L identity holds exactly.
enum class PairingForm { full, transport };

/// Everything the reduced cost needs besides the control itself.
struct ControlProblem {
  const OperatorSet* ops = nullptr;
  Vector initial;
  Vector target;
  double alpha = 1e-4;
  double u_max = 1.0;
  SolverOptions solver;
};

struct GradientResult {
  CostBreakdown cost;
  std::vector<double> gradient;  // same flattening as ControlTrajectory
  StateTrajectory state;
  AdjointTrajectory adjoint;
};

/// Forward sweep, discrete adjoint sweep, gradient evaluation.
GradientResult reduced_gradient(const ControlProblem& problem, const ControlTrajectory& ctrl,
                                PairingForm form = PairingForm::full);

/// Cost only (one forward sweep).
CostBreakdown evaluate_cost(const ControlProblem& problem, const ControlTrajectory& ctrl);

/// Gradient assembled from the OtD adjoint: at every instant
/// alpha u + sign_a q_i^T B p_i, weighted by the trapezoid rule.
std::vector<double> otd_gradient(const OperatorSet& ops, const ControlTrajectory& ctrl,
                                 const StateTrajectory& state,
                                 const AdjointTrajectory& otd_adjoint, double alpha);

enum class OptStatus { converged, max_iters, stalled };

const char* to_string(OptStatus status);

struct OptimizerOptions {
  /// Projected-gradient infinity-norm tolerance; negative selects
  /// 1e-6 * (1 + |J0|).
  double tol_g = -1.0;
  double tol_f = 1e-9;
  int patience = 5;
  int max_iters = 500;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 40;
  double min_step = 1e-12;
  double max_step = 1e12;
};

struct IterationRecord {
  int iter = 0;
  double cost = 0.0;
  double terminal = 0.0;
  double control = 0.0;
  double pg_norm = 0.0;
  double step = 0.0;
};

struct OptResult {
  ControlTrajectory control;
  std::vector<IterationRecord> history;
  int iterations = 0;
  OptStatus status = OptStatus::max_iters;
  CostBreakdown final_cost;
};

/// Projected spectral-gradient descent with Armijo backtracking on the box
/// 0 <= U <= u_max.
OptResult optimize(const ControlProblem& problem, const OptimizerOptions& opts,
                   const ControlTrajectory& initial_guess,
                   const std::function<void(const IterationRecord&)>& on_iteration = {});

/// ||P(U - g) - U||_inf for the box [0, u_max].
double projected_gradient_norm(const std::vector<double>& u, const std::vector<double>& g,
                               double u_max);

}  // namespace swarm
