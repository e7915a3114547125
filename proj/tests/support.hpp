#pragma once

#include <cmath>
#include <random>

#include "swarm/config.hpp"

namespace swarm::testing {

/// Small problem bundle kept at a stable address (ControlProblem points into it).
struct SmallProblem {
  Mesh mesh;
  ControlBasis basis;
  ActuatorModel model;
  OperatorSet ops;
  Vector initial;
  Vector target;
  ControlProblem problem;
  int n_steps = 0;
  double dt = 0.0;

  SmallProblem(int cells, int n_basis, int n_steps_, double horizon, double decay = 1.0,
               int quad_order = 4, double u_max = 5.0, double alpha = 1e-2)
      : n_steps(n_steps_), dt(horizon / n_steps_) {
    mesh = build_structured_mesh(cells, cells);
    basis = n_basis > 0 ? ControlBasis::gaussian(n_basis) : ControlBasis::constant();
    model = ActuatorModel{decay, u_max};
    ops = assemble_operators(mesh, basis, model, {0.1, quad_order});
    initial = project_density(mesh, ops.M, [](Point x) { return 1.0 + 0.5 * x.x * x.y; });
    target = project_density(mesh, ops.M, [](Point x) {
      return std::exp(-((x.x - 0.3) * (x.x - 0.3) + (x.y - 0.6) * (x.y - 0.6)) / 0.05);
    });
    problem.ops = &ops;
    problem.initial = initial;
    problem.target = target;
    problem.alpha = alpha;
    problem.u_max = u_max;
  }
  SmallProblem(const SmallProblem&) = delete;
  SmallProblem& operator=(const SmallProblem&) = delete;

  ControlTrajectory zero() const { return ControlTrajectory(n_steps, basis.size(), dt); }

  ControlTrajectory random(std::uint64_t seed, double lo = 0.1, double hi = 0.9) const {
    ControlTrajectory u = zero();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(lo * model.u_max, hi * model.u_max);
    for (double& v : u.values()) v = d(rng);
    return u;
  }
};

inline double rel_err(double a, double b, double floor = 1e-14) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace swarm::testing
