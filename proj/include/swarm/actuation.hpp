#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "swarm/mesh.hpp"

namespace swarm {

enum class BasisKind { gaussian, constant };

/// One-dimensional spatial basis psi_k(s), s in [0,1], shared by all four
/// actuator stacks.
struct ControlBasis {
  BasisKind kind = BasisKind::gaussian;
  std::vector<double> centers;
  double width = 0.0;

  int size() const { return static_cast<int>(centers.size()); }
  double eval(int k, double s) const;

  /// Gaussians centred at (k-1/2)/n; width <= 0 selects the default 1/n.
  static ControlBasis gaussian(int n, double width = 0.0);
  /// Single basis function psi == 1.
  static ControlBasis constant();
};

/// Exponential decay actuator model: the stack on a side pushes particles
/// along the inward normal with intensity e^{-c d}, d the distance to it.
struct ActuatorModel {
  double decay = 1.0;
  double u_max = 1.0;

  double profile(Side side, Point x) const;
  /// Derivative of profile() along the push axis of the side.
  double profile_slope(Side side, Point x) const;
};

/// 0 for the x axis (left/right stacks), 1 for the y axis (bottom/top).
inline constexpr int push_axis(Side s) {
  return (s == Side::bottom || s == Side::top) ? 1 : 0;
}
/// +1 if the stack pushes along +axis (bottom, left), -1 otherwise.
inline constexpr double push_sign(Side s) {
  return (s == Side::bottom || s == Side::left) ? 1.0 : -1.0;
}
/// Coordinate along the side that parametrises u_a(s, t).
inline constexpr double tangential(Side s, Point x) {
  return push_axis(s) == 1 ? x.x : x.y;
}

/// Control coefficients u_{i,a,k} for instants i=0..N, sides a=1..4, basis
/// k=1..N_c. Flat storage index is i*(4*N_c) + (a-1)*N_c + (k-1).
class ControlTrajectory {
 public:
  ControlTrajectory() = default;
  ControlTrajectory(int n_steps, int n_basis, double dt);

  int n_steps() const { return n_steps_; }
  int n_instants() const { return n_steps_ + 1; }
  int n_basis() const { return n_basis_; }
  double dt() const { return dt_; }
  std::size_t per_instant() const { return 4 * static_cast<std::size_t>(n_basis_); }
  std::size_t flat_size() const { return values_.size(); }

  std::size_t index(int i, Side a, int k) const {
    return static_cast<std::size_t>(i) * per_instant() +
           static_cast<std::size_t>(side_index(a)) * n_basis_ + k;
  }
  double& at(int i, Side a, int k) { return values_[index(i, a, k)]; }
  double at(int i, Side a, int k) const { return values_[index(i, a, k)]; }

  std::span<double> instant(int i);
  std::span<const double> instant(int i) const;

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool feasible(double u_max) const;
  void project(double u_max);

 private:
  int n_steps_ = 0;
  int n_basis_ = 0;
  double dt_ = 0.0;
  std::vector<double> values_;
};

/// u_a(s) = sum_k psi_k(s) u_{a,k} for one instant's 4*N_c coefficients.
double side_intensity(std::span<const double> coeffs, const ControlBasis& basis,
                      Side side, double s);

std::array<double, 2> eval_velocity(std::span<const double> coeffs,
                                    const ControlBasis& basis,
                                    const ActuatorModel& model, Point x);

/// Unit-intensity field of one side: profile times the push axis unit vector.
std::array<double, 2> unit_profile_field(Side side, const ActuatorModel& model, Point x);

/// Max of |v| over a samples-by-samples grid of the closed square.
double velocity_sup_norm(std::span<const double> coeffs, const ControlBasis& basis,
                         const ActuatorModel& model, int samples);

/// Max of |u_a(s)| over `samples` equispaced points of [0,1].
double side_sup_norm(std::span<const double> coeffs, const ControlBasis& basis,
                     Side side, int samples);

/// Trapezoid-in-time sum over sides of ||u_a(t)||^2_{L^inf}.
double control_space_norm_sq(const ControlTrajectory& ctrl, const ControlBasis& basis,
                             int samples);

/// Trapezoid-in-time integral of ||v(t)||^2_{L^inf}.
double velocity_l2_linf_sq(const ControlTrajectory& ctrl, const ControlBasis& basis,
                           const ActuatorModel& model, int samples);

/// Trapezoid weight of instant i on 0..n_steps (1/2 at the ends).
inline double trapezoid_weight(int i, int n_steps) {
  return (i == 0 || i == n_steps) ? 0.5 : 1.0;
}

}  // namespace swarm
