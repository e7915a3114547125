#include "swarm/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace swarm {

namespace {

double control_term(const ControlTrajectory& ctrl, double alpha) {
  double sum = 0.0;
  const int n = ctrl.n_steps();
  for (int i = 0; i <= n; ++i) {
    double sq = 0.0;
    for (double v : ctrl.instant(i)) sq += v * v;
    sum += 2.0 * trapezoid_weight(i, n) * sq;
  }
  return alpha * ctrl.dt() / 4.0 * sum;
}

}  // namespace

CostBreakdown cost(const OperatorSet& ops, const ControlTrajectory& ctrl,
                   const StateTrajectory& state, const Vector& target, double alpha) {
  if (state.n_steps() != ctrl.n_steps()) {
    throw std::invalid_argument("cost: state and control have different step counts");
  }
  if (target.size() != ops.n_nodes()) {
    throw std::invalid_argument("cost: target size does not match the mesh");
  }
  const Vector r = state.q.back() - target;
  CostBreakdown c;
  c.terminal = 0.5 * r.dot(ops.M * r);
  c.control = control_term(ctrl, alpha);
  c.total = c.terminal + c.control;
  return c;
}

CostBreakdown evaluate_cost(const ControlProblem& problem, const ControlTrajectory& ctrl) {
  const StateTrajectory state =
      solve_forward(*problem.ops, ctrl, problem.initial, problem.solver);
  return cost(*problem.ops, ctrl, state, problem.target, problem.alpha);
}

GradientResult reduced_gradient(const ControlProblem& problem, const ControlTrajectory& ctrl,
                                PairingForm form) {
  const OperatorSet& ops = *problem.ops;
  GradientResult out;
  out.state = solve_forward(ops, ctrl, problem.initial, problem.solver);
  out.adjoint = solve_adjoint_dto(ops, ctrl, out.state, problem.target, problem.solver);
  out.cost = cost(ops, ctrl, out.state, problem.target, problem.alpha);

  const int n = ctrl.n_steps();
  const double dt = ctrl.dt();
  out.gradient.assign(ctrl.flat_size(), 0.0);
  for (int i = 0; i <= n; ++i) {
    // Adjoint multipliers of the two constraints touching u_i.
    Vector pair = Vector::Zero(ops.n_nodes());
    if (i >= 1) pair += out.adjoint.at(i);
    if (i <= n - 1) pair += out.adjoint.at(i + 1);
    const Vector& q = out.state.q[i];
    const double w = trapezoid_weight(i, n);
    for (Side side : kAllSides) {
      const int s = side_index(side);
      for (int k = 0; k < ops.n_basis; ++k) {
        double pairing;
        if (form == PairingForm::full) {
          pairing = -pair.dot(ops.G[s][k] * q);
        } else {
          pairing = q.dot(ops.B[s][k] * pair);
        }
        const std::size_t idx = ctrl.index(i, side, k);
        out.gradient[idx] = w * problem.alpha * dt * ctrl.values()[idx] +
                            0.5 * dt * push_sign(side) * pairing;
      }
    }
  }
  return out;
}

std::vector<double> otd_gradient(const OperatorSet& ops, const ControlTrajectory& ctrl,
                                 const StateTrajectory& state,
                                 const AdjointTrajectory& otd_adjoint, double alpha) {
  if (otd_adjoint.first != 0 || otd_adjoint.last() != ctrl.n_steps()) {
    throw std::invalid_argument("otd_gradient: adjoint must cover instants 0..N");
  }
  const int n = ctrl.n_steps();
  std::vector<double> g(ctrl.flat_size(), 0.0);
  for (int i = 0; i <= n; ++i) {
    const Vector& q = state.q[i];
    const Vector& p = otd_adjoint.at(i);
    const double w = trapezoid_weight(i, n) * ctrl.dt();
    for (Side side : kAllSides) {
      const int s = side_index(side);
      for (int k = 0; k < ops.n_basis; ++k) {
        const std::size_t idx = ctrl.index(i, side, k);
        g[idx] = w * (alpha * ctrl.values()[idx] + push_sign(side) * q.dot(ops.B[s][k] * p));
      }
    }
  }
  return g;
}

const char* to_string(OptStatus status) {
  switch (status) {
    case OptStatus::converged: return "converged";
    case OptStatus::max_iters: return "max-iters";
    case OptStatus::stalled: return "stalled";
  }
  return "unknown";
}

double projected_gradient_norm(const std::vector<double>& u, const std::vector<double>& g,
                               double u_max) {
  double best = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double moved = std::clamp(u[j] - g[j], 0.0, u_max);
    best = std::max(best, std::abs(moved - u[j]));
  }
  return best;
}

OptResult optimize(const ControlProblem& problem, const OptimizerOptions& opts,
                   const ControlTrajectory& initial_guess,
                   const std::function<void(const IterationRecord&)>& on_iteration) {
  const double u_max = problem.u_max;
  OptResult result;
  result.control = initial_guess;
  result.control.project(u_max);

  GradientResult cur = reduced_gradient(problem, result.control);
  const double tol_g = opts.tol_g >= 0.0 ? opts.tol_g : 1e-6 * (1.0 + std::abs(cur.cost.total));

  auto record = [&](int iter, const CostBreakdown& c, double pg, double step) {
    IterationRecord r{iter, c.total, c.terminal, c.control, pg, step};
    result.history.push_back(r);
    if (on_iteration) on_iteration(r);
  };

  double pg = projected_gradient_norm(result.control.values(), cur.gradient, u_max);
  record(0, cur.cost, pg, 0.0);

  std::vector<double> prev_u, prev_g;
  int small_decrease = 0;
  result.status = OptStatus::max_iters;
  int iter = 0;
  while (true) {
    if (pg <= tol_g) {
      result.status = OptStatus::converged;
      break;
    }
    if (iter >= opts.max_iters) {
      result.status = OptStatus::max_iters;
      break;
    }

    double step;
    if (prev_u.empty()) {
      const double gmax = std::accumulate(cur.gradient.begin(), cur.gradient.end(), 0.0,
                                          [](double m, double v) { return std::max(m, std::abs(v)); });
      step = 0.1 * u_max / gmax;
    } else {
      double ss = 0.0, sy = 0.0;
      for (std::size_t j = 0; j < prev_u.size(); ++j) {
        const double s = result.control.values()[j] - prev_u[j];
        const double y = cur.gradient[j] - prev_g[j];
        ss += s * s;
        sy += s * y;
      }
      step = sy > 0.0 ? ss / sy : opts.max_step;
    }
    step = std::clamp(step, opts.min_step, opts.max_step);

    const std::vector<double>& u = result.control.values();
    ControlTrajectory trial = result.control;
    CostBreakdown trial_cost;
    bool accepted = false;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      double slope = 0.0;
      for (std::size_t j = 0; j < u.size(); ++j) {
        trial.values()[j] = std::clamp(u[j] - step * cur.gradient[j], 0.0, u_max);
        slope += cur.gradient[j] * (trial.values()[j] - u[j]);
      }
      if (slope >= 0.0) break;  // projected step is not a descent step
      trial_cost = evaluate_cost(problem, trial);
      if (trial_cost.total <= cur.cost.total + opts.armijo * slope &&
          trial_cost.total < cur.cost.total) {
        accepted = true;
        break;
      }
      step *= opts.backtrack;
    }
    if (!accepted) {
      result.status = OptStatus::stalled;
      break;
    }

    ++iter;
    prev_u = u;
    prev_g = cur.gradient;
    const double old_cost = cur.cost.total;
    result.control = std::move(trial);
    cur = reduced_gradient(problem, result.control);
    pg = projected_gradient_norm(result.control.values(), cur.gradient, u_max);
    record(iter, cur.cost, pg, step);

    const double rel = (old_cost - cur.cost.total) /
                       std::max(std::abs(old_cost), std::numeric_limits<double>::min());
    small_decrease = rel <= opts.tol_f ? small_decrease + 1 : 0;
    if (small_decrease >= opts.patience) {
      result.status = OptStatus::converged;
      break;
    }
  }
  result.iterations = iter;
  result.final_cost = cur.cost;
  return result;
}

}  // namespace swarm
