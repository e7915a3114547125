#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "swarm/ocp.hpp"

using namespace swarm;
using swarm::testing::SmallProblem;
using swarm::testing::rel_err;

TEST_CASE("cost terms") {
  SmallProblem sp(3, 2, 4, 0.1);
  ControlTrajectory u = sp.zero();
  for (double& v : u.values()) v = 2.0;
  const StateTrajectory st = solve_forward(sp.ops, u, sp.initial);
  const CostBreakdown c = cost(sp.ops, u, st, sp.target, sp.problem.alpha);
  const Vector r = st.q.back() - sp.target;
  CHECK(c.terminal == doctest::Approx(0.5 * r.dot(sp.ops.M * r)).epsilon(1e-14));
  // alpha/2 * int_0^T |u|^2 dt with |u|^2 = 8 * 4 constant.
  CHECK(c.control == doctest::Approx(0.5 * sp.problem.alpha * 0.1 * 32.0).epsilon(1e-14));
  CHECK(c.total == doctest::Approx(c.terminal + c.control));
}

TEST_CASE("adjoint gradient equals componentwise central differences") {
  SmallProblem sp(2, 2, 4, 0.1);  // 3x3 nodes, N = 4, N_c = 2
  const ControlTrajectory u = sp.random(21);
  const GradientResult g = reduced_gradient(sp.problem, u);
  const double eps = 1e-5;
  double worst = 0.0;
  for (std::size_t j = 0; j < u.flat_size(); ++j) {
    ControlTrajectory up = u, dn = u;
    up.values()[j] += eps;
    dn.values()[j] -= eps;
    const double fd =
        (evaluate_cost(sp.problem, up).total - evaluate_cost(sp.problem, dn).total) / (2 * eps);
    worst = std::max(worst, rel_err(g.gradient[j], fd, 1e-10));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("zero control is stationary when the target is the uniform equilibrium") {
  SmallProblem sp(2, 1, 4, 0.1, 1.0, 4, 5.0, 1.0);
  const ControlTrajectory u = sp.zero();
  sp.problem.initial = project_density(sp.mesh, sp.ops.M, [](Point) { return 1.0; });
  sp.problem.target = sp.problem.initial;
  const GradientResult g = reduced_gradient(sp.problem, u);
  for (double v : g.gradient) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("transport and full pairings agree when the identity is exact") {
  SmallProblem sp(4, 0, 5, 0.1, 0.0, 2);
  const ControlTrajectory u = sp.random(4);
  const GradientResult a = reduced_gradient(sp.problem, u, PairingForm::full);
  const GradientResult b = reduced_gradient(sp.problem, u, PairingForm::transport);
  for (std::size_t j = 0; j < a.gradient.size(); ++j) {
    CHECK(a.gradient[j] == doctest::Approx(b.gradient[j]).epsilon(1e-10));
  }
}

TEST_CASE("OtD gradient approaches the DtO gradient as dt shrinks") {
  // Smooth-in-time control and direction sampled on each grid.
  auto fill = [](ControlTrajectory& u, double amp) {
    for (int i = 0; i <= u.n_steps(); ++i) {
      const double t = i * u.dt();
      auto v = u.instant(i);
      for (std::size_t j = 0; j < v.size(); ++j) v[j] = amp * (1.0 + 0.5 * std::sin(10 * t + j));
    }
  };
  double prev = 0.0;
  for (int level = 0; level < 3; ++level) {
    SmallProblem sp(5, 2, 5 << level, 0.1);
    ControlTrajectory u = sp.zero(), h = sp.zero();
    fill(u, 2.0);
    fill(h, 1.0);
    const GradientResult g = reduced_gradient(sp.problem, u);
    const AdjointTrajectory otd = solve_adjoint_otd(sp.ops, u, g.state, sp.target);
    const std::vector<double> go = otd_gradient(sp.ops, u, g.state, otd, sp.problem.alpha);
    double a = 0.0, b = 0.0;
    for (std::size_t j = 0; j < go.size(); ++j) {
      a += g.gradient[j] * h.values()[j];
      b += go[j] * h.values()[j];
    }
    const double err = std::abs(a - b);
    if (level > 0) CHECK(prev / err > 1.5);
    prev = err;
  }
}

TEST_CASE("projected gradient norm") {
  const std::vector<double> u = {0.0, 1.0, 2.0};
  const std::vector<double> g = {1.0, -5.0, 0.5};
  // Moves: clamp(-1)=0 -> 0; clamp(6)=2 -> 1; 1.5 -> 0.5.
  CHECK(projected_gradient_norm(u, g, 2.0) == doctest::Approx(1.0));
}

TEST_CASE("optimizer stops immediately at a stationary point") {
  SmallProblem sp(4, 2, 5, 0.1);
  sp.problem.initial = project_density(sp.mesh, sp.ops.M, [](Point) { return 1.0; });
  sp.problem.target = sp.problem.initial;
  const OptResult r = optimize(sp.problem, {}, sp.zero());
  CHECK(r.status == OptStatus::converged);
  CHECK(r.iterations == 0);
  for (double v : r.control.values()) CHECK(v == 0.0);
}

TEST_CASE("optimizer decreases the cost monotonically and stays feasible") {
  SmallProblem sp(5, 2, 8, 0.1, 1.0, 4, 10.0, 1e-4);
  OptimizerOptions o;
  o.max_iters = 40;
  int calls = 0;
  const OptResult r = optimize(sp.problem, o, sp.zero(), [&](const IterationRecord&) { ++calls; });
  REQUIRE(r.history.size() >= 2);
  CHECK(calls == static_cast<int>(r.history.size()));
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    CHECK(r.history[i].cost <= r.history[i - 1].cost);
  }
  CHECK(r.final_cost.total < r.history.front().cost);
  CHECK(r.control.feasible(10.0));
}
