#include "swarm/actuation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace swarm {

double ControlBasis::eval(int k, double s) const {
  if (kind == BasisKind::constant) return 1.0;
  const double d = s - centers[k];
  return std::exp(-d * d / (2.0 * width * width));
}

ControlBasis ControlBasis::gaussian(int n, double width) {
  if (n < 1) throw std::invalid_argument("ControlBasis::gaussian: n must be >= 1");
  ControlBasis b;
  b.kind = BasisKind::gaussian;
  b.width = width > 0.0 ? width : 1.0 / n;
  b.centers.resize(n);
  for (int k = 0; k < n; ++k) b.centers[k] = (k + 0.5) / n;
  return b;
}

ControlBasis ControlBasis::constant() {
  ControlBasis b;
  b.kind = BasisKind::constant;
  b.centers = {0.5};
  b.width = 0.0;
  return b;
}

namespace {

double distance_to_side(Side side, Point x) {
  switch (side) {
    case Side::bottom: return x.y;
    case Side::right: return 1.0 - x.x;
    case Side::top: return 1.0 - x.y;
    case Side::left: return x.x;
  }
  return 0.0;
}

}  // namespace

double ActuatorModel::profile(Side side, Point x) const {
  return std::exp(-decay * distance_to_side(side, x));
}

double ActuatorModel::profile_slope(Side side, Point x) const {
  // d/d(axis) e^{-c d}: distance decreases along the push direction.
  return -decay * push_sign(side) * profile(side, x);
}

ControlTrajectory::ControlTrajectory(int n_steps, int n_basis, double dt)
    : n_steps_(n_steps), n_basis_(n_basis), dt_(dt) {
  if (n_steps < 1) throw std::invalid_argument("ControlTrajectory: n_steps must be >= 1");
  if (n_basis < 1) throw std::invalid_argument("ControlTrajectory: n_basis must be >= 1");
  if (!(dt > 0.0)) throw std::invalid_argument("ControlTrajectory: dt must be > 0");
  values_.assign(static_cast<std::size_t>(n_steps + 1) * per_instant(), 0.0);
}

std::span<double> ControlTrajectory::instant(int i) {
  return {values_.data() + static_cast<std::size_t>(i) * per_instant(), per_instant()};
}

std::span<const double> ControlTrajectory::instant(int i) const {
  return {values_.data() + static_cast<std::size_t>(i) * per_instant(), per_instant()};
}

bool ControlTrajectory::feasible(double u_max) const {
  return std::all_of(values_.begin(), values_.end(),
                     [u_max](double v) { return v >= 0.0 && v <= u_max; });
}

void ControlTrajectory::project(double u_max) {
  for (double& v : values_) v = std::clamp(v, 0.0, u_max);
}

double side_intensity(std::span<const double> coeffs, const ControlBasis& basis,
                      Side side, double s) {
  const int nb = basis.size();
  const std::size_t off = static_cast<std::size_t>(side_index(side)) * nb;
  double u = 0.0;
  for (int k = 0; k < nb; ++k) u += basis.eval(k, s) * coeffs[off + k];
  return u;
}

std::array<double, 2> unit_profile_field(Side side, const ActuatorModel& model, Point x) {
  std::array<double, 2> b{0.0, 0.0};
  b[push_axis(side)] = model.profile(side, x);
  return b;
}

std::array<double, 2> eval_velocity(std::span<const double> coeffs,
                                    const ControlBasis& basis,
                                    const ActuatorModel& model, Point x) {
  if (coeffs.size() != 4 * static_cast<std::size_t>(basis.size())) {
    throw std::invalid_argument("eval_velocity: expected " +
                                std::to_string(4 * basis.size()) + " coefficients, got " +
                                std::to_string(coeffs.size()));
  }
  if (!(x.x >= 0.0 && x.x <= 1.0 && x.y >= 0.0 && x.y <= 1.0)) {
    throw std::out_of_range("eval_velocity: point outside the closed unit square");
  }
  std::array<double, 2> v{0.0, 0.0};
  for (Side side : kAllSides) {
    const double u = side_intensity(coeffs, basis, side, tangential(side, x));
    v[push_axis(side)] += push_sign(side) * u * model.profile(side, x);
  }
  return v;
}

double velocity_sup_norm(std::span<const double> coeffs, const ControlBasis& basis,
                         const ActuatorModel& model, int samples) {
  if (samples < 2) throw std::invalid_argument("velocity_sup_norm: samples must be >= 2");
  double best = 0.0;
  for (int j = 0; j < samples; ++j) {
    for (int i = 0; i < samples; ++i) {
      const Point x{static_cast<double>(i) / (samples - 1),
                    static_cast<double>(j) / (samples - 1)};
      const auto v = eval_velocity(coeffs, basis, model, x);
      best = std::max(best, std::hypot(v[0], v[1]));
    }
  }
  return best;
}

double side_sup_norm(std::span<const double> coeffs, const ControlBasis& basis,
                     Side side, int samples) {
  if (samples < 2) throw std::invalid_argument("side_sup_norm: samples must be >= 2");
  double best = 0.0;
  for (int j = 0; j < samples; ++j) {
    const double s = static_cast<double>(j) / (samples - 1);
    best = std::max(best, std::abs(side_intensity(coeffs, basis, side, s)));
  }
  return best;
}

double control_space_norm_sq(const ControlTrajectory& ctrl, const ControlBasis& basis,
                             int samples) {
  double total = 0.0;
  for (int i = 0; i <= ctrl.n_steps(); ++i) {
    double inst = 0.0;
    for (Side side : kAllSides) {
      const double m = side_sup_norm(ctrl.instant(i), basis, side, samples);
      inst += m * m;
    }
    total += trapezoid_weight(i, ctrl.n_steps()) * ctrl.dt() * inst;
  }
  return total;
}

double velocity_l2_linf_sq(const ControlTrajectory& ctrl, const ControlBasis& basis,
                           const ActuatorModel& model, int samples) {
  double total = 0.0;
  for (int i = 0; i <= ctrl.n_steps(); ++i) {
    const double v = velocity_sup_norm(ctrl.instant(i), basis, model, samples);
    total += trapezoid_weight(i, ctrl.n_steps()) * ctrl.dt() * v * v;
  }
  return total;
}

}  // namespace swarm
