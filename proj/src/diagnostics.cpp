#include "swarm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace swarm {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double rel_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

BoundCheck make_check(std::string name, double lhs, double rhs) {
  return {std::move(name), lhs, rhs, lhs <= rhs * (1.0 + kBoundSlack)};
}

template <typename T>
void take(std::optional<T>& dst, const std::optional<T>& src) {
  if (src) dst = src;
}

}  // namespace

void DiagnosticsReport::merge(const DiagnosticsReport& o) {
  take(bcl_residuals, o.bcl_residuals);
  take(bcl_max, o.bcl_max);
  take(conservation_defect, o.conservation_defect);
  take(commutation_residual, o.commutation_residual);
  take(commutation_bound, o.commutation_bound);
  take(velocity_bound, o.velocity_bound);
  if (!o.velocity_sup.empty()) velocity_sup = o.velocity_sup;
  if (!o.lambda_t.empty()) lambda_t = o.lambda_t;
  take(alpha0_bar, o.alpha0_bar);
  take(control_norm_sq, o.control_norm_sq);
  if (!o.energy_checks.empty()) energy_checks = o.energy_checks;
  take(mass_drift, o.mass_drift);
  take(gradient_fd_error, o.gradient_fd_error);
  take(tangent_adjoint_error, o.tangent_adjoint_error);
}

bool DiagnosticsReport::all_bounds_pass() const {
  if (velocity_bound && !velocity_bound->pass) return false;
  return std::all_of(energy_checks.begin(), energy_checks.end(),
                     [](const BoundCheck& c) { return c.pass; });
}

DiagnosticsReport check_structure(const OperatorSet& ops,
                                  const std::vector<std::vector<double>>& sample_controls) {
  DiagnosticsReport r;
  std::array<std::vector<double>, 4> res;
  double worst = 0.0, defect = 0.0;
  for (Side side : kAllSides) {
    const int s = side_index(side);
    res[s].resize(ops.n_basis);
    for (int k = 0; k < ops.n_basis; ++k) {
      res[s][k] = bcl_residual(ops, side, k);
      worst = std::max(worst, res[s][k]);
      defect = std::max(defect, conservation_defect(ops, side, k));
    }
  }
  double comm = 0.0, bound = 0.0;
  for (const auto& u : sample_controls) {
    const SparseMatrix gq_t = gamma_q(ops, u).transpose();
    const SparseMatrix diff = gq_t - gamma_p(ops, u);
    comm = std::max(comm, max_abs(diff));
    double b = 0.0;
    for (int s = 0; s < 4; ++s) {
      for (int k = 0; k < ops.n_basis; ++k) {
        b += std::abs(u[static_cast<std::size_t>(s) * ops.n_basis + k]) * res[s][k];
      }
    }
    bound = std::max(bound, b);
  }
  r.bcl_residuals = std::move(res);
  r.bcl_max = worst;
  r.conservation_defect = defect;
  r.commutation_residual = comm;
  r.commutation_bound = bound;
  return r;
}

DiagnosticsReport check_energy(const OperatorSet& ops, const ControlTrajectory& ctrl,
                               const StateTrajectory& state, const ControlBasis& basis,
                               const ActuatorModel& model, int sup_samples) {
  if (state.n_steps() != ctrl.n_steps()) {
    throw std::invalid_argument("check_energy: state and control have different step counts");
  }
  DiagnosticsReport r;
  const double mu = ops.mu;
  const int n = ctrl.n_steps();
  const double dt = ctrl.dt();
  const double horizon = n * dt;

  double alpha0 = mu / 2.0;
  r.velocity_sup.resize(n + 1);
  r.lambda_t.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double v = velocity_sup_norm(ctrl.instant(i), basis, model, sup_samples);
    r.velocity_sup[i] = v;
    r.lambda_t[i] = v * v / mu;
    alpha0 = std::min(alpha0, v * v / (2.0 * mu));
  }
  r.alpha0_bar = alpha0;

  const double unorm = control_space_norm_sq(ctrl, basis, sup_samples);
  r.control_norm_sq = unorm;
  r.velocity_bound = make_check("velocity_l2linf", velocity_l2_linf_sq(ctrl, basis, model, sup_samples),
                        8.0 * unorm);

  const double q0 = state.q[0].dot(ops.M * state.q[0]);
  double linf = 0.0, l2 = 0.0, h1 = 0.0, drift = 0.0;
  const double mass0 = total_mass(ops.M, state.q[0]);
  for (int i = 0; i <= n; ++i) {
    const Vector& q = state.q[i];
    const double l2sq = q.dot(ops.M * q);
    const double gradsq = q.dot(ops.A * q) / mu;
    const double w = trapezoid_weight(i, n) * dt;
    linf = std::max(linf, l2sq);
    l2 += w * l2sq;
    h1 += w * (l2sq + gradsq);
    drift = std::max(drift, std::abs(total_mass(ops.M, q) - mass0));
  }
  r.mass_drift = drift;

  const double growth = std::exp(16.0 / mu * unorm);
  const double h1_rhs = alpha0 > 0.0
                            ? (0.5 + 8.0 / mu * unorm * growth) * q0 / alpha0
                            : std::numeric_limits<double>::infinity();
  r.energy_checks = {
      make_check("linf_l2", linf, growth * q0),
      make_check("l2_l2", l2, horizon * growth * q0),
      make_check("l2_h1", h1, h1_rhs),
  };
  return r;
}

ControlTrajectory random_feasible_direction(const ControlTrajectory& ctrl, double u_max,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ControlTrajectory h(ctrl.n_steps(), ctrl.n_basis(), ctrl.dt());
  for (std::size_t j = 0; j < h.flat_size(); ++j) {
    double v = dist(rng);
    const double u = ctrl.values()[j];
    if (u <= 0.0) v = std::abs(v);
    if (u >= u_max) v = -std::abs(v);
    h.values()[j] = v;
  }
  return h;
}

DiagnosticsReport check_gradients(const ControlProblem& problem, const ControlTrajectory& ctrl,
                                  const GradientCheckOptions& opts) {
  const OperatorSet& ops = *problem.ops;
  const GradientResult base = reduced_gradient(problem, ctrl);
  const int n = ctrl.n_steps();

  auto cost_at = [&](const ControlTrajectory& h, double t) {
    ControlTrajectory moved = ctrl;
    for (std::size_t j = 0; j < moved.flat_size(); ++j) moved.values()[j] += t * h.values()[j];
    return evaluate_cost(problem, moved).total;
  };

  double fd_err = 0.0, duality_err = 0.0;
  for (int probe = 0; probe < opts.n_probes; ++probe) {
    const ControlTrajectory h =
        random_feasible_direction(ctrl, problem.u_max, opts.seed + static_cast<std::uint64_t>(probe));
    const double analytic = dot(base.gradient, h.values());

    const double e = opts.eps;
    const double d1 = (cost_at(h, e) - cost_at(h, -e)) / (2.0 * e);
    const double d2 = (cost_at(h, e / 2) - cost_at(h, -e / 2)) / e;
    const double fd = (4.0 * d2 - d1) / 3.0;
    fd_err = std::max(fd_err, rel_error(analytic, fd, opts.floor));

    double alpha_part = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double w = trapezoid_weight(i, n) * problem.alpha * ctrl.dt();
      const auto u = ctrl.instant(i);
      const auto hv = h.instant(i);
      for (std::size_t j = 0; j < u.size(); ++j) alpha_part += w * u[j] * hv[j];
    }
    const StateTrajectory z = solve_tangent(ops, ctrl, base.state, h, problem.solver);
    const Vector r = base.state.q.back() - problem.target;
    const double via_tangent = r.dot(ops.M * z.q.back());
    duality_err = std::max(duality_err, rel_error(analytic - alpha_part, via_tangent, opts.floor));
  }
  DiagnosticsReport rep;
  rep.gradient_fd_error = fd_err;
  rep.tangent_adjoint_error = duality_err;
  return rep;
}

void write_report(const DiagnosticsReport& r, std::ostream& os) {
  os.precision(10);
  if (r.bcl_residuals) {
    for (int s = 0; s < 4; ++s) {
      for (std::size_t k = 0; k < (*r.bcl_residuals)[s].size(); ++k) {
        os << "bcl_residual[side=" << s + 1 << ",k=" << k + 1
           << "]: " << (*r.bcl_residuals)[s][k] << '\n';
      }
    }
  }
  auto opt = [&os](const char* key, const std::optional<double>& v) {
    if (v) os << key << ": " << *v << '\n';
  };
  opt("bcl_max", r.bcl_max);
  opt("conservation_defect", r.conservation_defect);
  opt("commutation_residual", r.commutation_residual);
  opt("commutation_bound", r.commutation_bound);
  auto check = [&os](const BoundCheck& c) {
    os << c.name << "_lhs: " << c.lhs << '\n'
       << c.name << "_rhs: " << c.rhs << '\n'
       << c.name << "_pass: " << (c.pass ? "true" : "false") << '\n';
  };
  if (r.velocity_bound) check(*r.velocity_bound);
  opt("control_norm_sq", r.control_norm_sq);
  opt("alpha0_bar", r.alpha0_bar);
  for (const auto& c : r.energy_checks) check(c);
  opt("mass_drift", r.mass_drift);
  opt("gradient_fd_error", r.gradient_fd_error);
  opt("tangent_adjoint_error", r.tangent_adjoint_error);
}

void write_instant_series_csv(const DiagnosticsReport& r, double dt, std::ostream& os) {
  os << "i,t,velocity_sup,lambda\n";
  os.precision(12);
  for (std::size_t i = 0; i < r.lambda_t.size(); ++i) {
    os << i << ',' << i * dt << ',' << r.velocity_sup[i] << ',' << r.lambda_t[i] << '\n';
  }
}

}  // namespace swarm
