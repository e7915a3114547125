#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "swarm/solver.hpp"

using namespace swarm;
using swarm::testing::SmallProblem;

namespace {

using Dense = Eigen::MatrixXd;

/// Whole-horizon state system: block row i (1..N) reads
/// A+(u_i) q_i - A-(u_{i-1}) q_{i-1} = 0 with q_0 fixed.
struct DenseKkt {
  Dense F;          // Jacobian in (q_1..q_N)
  Vector rhs;       // A-(u_0) q_0 in the first block
  Eigen::Index n;   // nodes
  int steps;
};

DenseKkt dense_system(const OperatorSet& ops, const ControlTrajectory& u, const Vector& q0) {
  DenseKkt s;
  s.n = ops.n_nodes();
  s.steps = u.n_steps();
  const Eigen::Index n = s.n;
  s.F = Dense::Zero(n * s.steps, n * s.steps);
  s.rhs = Vector::Zero(n * s.steps);
  for (int i = 1; i <= s.steps; ++i) {
    s.F.block((i - 1) * n, (i - 1) * n, n, n) = Dense(state_transition_plus(ops, u.instant(i), u.dt()));
    const Dense minus = Dense(state_transition_minus(ops, u.instant(i - 1), u.dt()));
    if (i == 1) {
      s.rhs.head(n) = minus * q0;
    } else {
      s.F.block((i - 1) * n, (i - 2) * n, n, n) = -minus;
    }
  }
  return s;
}

}  // namespace

TEST_CASE("forward sweep equals the dense whole-horizon solve") {
  SmallProblem sp(2, 2, 3, 0.1);
  const ControlTrajectory u = sp.random(11);
  const StateTrajectory st = solve_forward(sp.ops, u, sp.initial);
  const DenseKkt k = dense_system(sp.ops, u, sp.initial);
  const Vector q = k.F.fullPivLu().solve(k.rhs);
  for (int i = 1; i <= 3; ++i) {
    CHECK((st.q[i] - q.segment((i - 1) * k.n, k.n)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("discrete adjoint equals the dense KKT multiplier") {
  SmallProblem sp(2, 2, 3, 0.1);
  const ControlTrajectory u = sp.random(12);
  const StateTrajectory st = solve_forward(sp.ops, u, sp.initial);
  const AdjointTrajectory adj = solve_adjoint_dto(sp.ops, u, st, sp.target);
  REQUIRE(adj.first == 1);
  REQUIRE(adj.last() == 3);

  const DenseKkt k = dense_system(sp.ops, u, sp.initial);
  Vector dj = Vector::Zero(k.n * 3);
  dj.tail(k.n) = sp.ops.M * (st.q[3] - sp.target);
  const Vector lambda = k.F.transpose().fullPivLu().solve(dj);
  for (int i = 1; i <= 3; ++i) {
    const Vector li = lambda.segment((i - 1) * k.n, k.n);
    CHECK((adj.at(i) * u.dt() - li).cwiseAbs().maxCoeff() < 1e-11 * (1.0 + li.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("mass is conserved by the forward sweep") {
  SmallProblem sp(6, 3, 20, 0.1);
  const ControlTrajectory u = sp.random(3);
  const StateTrajectory st = solve_forward(sp.ops, u, sp.initial);
  for (const Vector& q : st.q) CHECK(std::abs(total_mass(sp.ops.M, q) - 1.0) < 1e-7);
}

TEST_CASE("state matrices: commutation up to the quadrature residual") {
  SmallProblem exact(5, 0, 2, 0.1, 0.0, 2);
  std::vector<double> u = {1.0, 2.0, 3.0, 4.0};
  CHECK(max_abs(SparseMatrix(gamma_q(exact.ops, u).transpose()) - gamma_p(exact.ops, u)) < 1e-13);
  // Columns of Gq sum to zero: 1^T Gq = 0.
  const Vector colsum = gamma_q(exact.ops, u).transpose() * Vector::Ones(exact.ops.n_nodes());
  CHECK(colsum.cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("BiCGSTAB and sparse LU agree") {
  SmallProblem sp(6, 3, 10, 0.1);
  const ControlTrajectory u = sp.random(5);
  SolverOptions it;
  it.kind = LinearSolverKind::bicgstab;
  it.rel_tol = 1e-13;
  const StateTrajectory a = solve_forward(sp.ops, u, sp.initial);
  const StateTrajectory b = solve_forward(sp.ops, u, sp.initial, it);
  CHECK((a.q.back() - b.q.back()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("tangent: first-order remainder shrinks like eps^2") {
  SmallProblem sp(4, 2, 6, 0.1);
  const ControlTrajectory u = sp.random(7);
  const StateTrajectory st = solve_forward(sp.ops, u, sp.initial);
  ControlTrajectory h = sp.random(8, -0.5, 0.5);
  const StateTrajectory z = solve_tangent(sp.ops, u, st, h);
  double prev = 0.0;
  for (int level = 0; level < 4; ++level) {
    const double eps = 1e-1 / std::pow(2.0, level);
    ControlTrajectory moved = u;
    for (std::size_t j = 0; j < moved.flat_size(); ++j) moved.values()[j] += eps * h.values()[j];
    const StateTrajectory sm = solve_forward(sp.ops, moved, sp.initial);
    const double rem = (sm.q.back() - st.q.back() - eps * z.q.back()).norm();
    if (level > 0) CHECK(prev / rem == doctest::Approx(4.0).epsilon(0.05));
    prev = rem;
  }
}

TEST_CASE("solver input validation") {
  SmallProblem sp(2, 2, 3, 0.1);
  ControlTrajectory wrong(3, 5, sp.dt);
  CHECK_THROWS(solve_forward(sp.ops, wrong, sp.initial));
  CHECK_THROWS(solve_forward(sp.ops, sp.zero(), Vector::Ones(3)));
  Vector bad = sp.initial;
  bad[0] = std::nan("");
  CHECK_THROWS(solve_forward(sp.ops, sp.zero(), bad));
}

TEST_CASE("solver errors carry the time index") {
  const SolverError e("singular step matrix", 7);
  CHECK(e.time_index() == 7);
  CHECK(std::string(e.what()).find("time index 7") != std::string::npos);
}
