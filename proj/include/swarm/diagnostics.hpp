#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "swarm/ocp.hpp"

namespace swarm {

struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// Every field is optional; each check_* fills its own part.
struct DiagnosticsReport {
  std::optional<std::array<std::vector<double>, 4>> bcl_residuals;
  std::optional<double> bcl_max;
  std::optional<double> conservation_defect;
  std::optional<double> commutation_residual;
  std::optional<double> commutation_bound;

  std::optional<BoundCheck> velocity_bound;
  std::vector<double> velocity_sup;  // per instant
  std::vector<double> lambda_t;      // per instant
  std::optional<double> alpha0_bar;
  std::optional<double> control_norm_sq;
  std::vector<BoundCheck> energy_checks;
  std::optional<double> mass_drift;

  std::optional<double> gradient_fd_error;
  std::optional<double> tangent_adjoint_error;

  /// Merge the filled fields of `other` into this report.
  void merge(const DiagnosticsReport& other);
  bool all_bounds_pass() const;
};

/// Relative slack allowed on lhs <= rhs for the energy and velocity bounds;
/// it absorbs rounding in the tight zero-control case.
inline constexpr double kBoundSlack = 1e-12;

/// B/C/L residuals per side and basis function, plus the commutation defect
/// max |Gq(u)^T - Gp(u)| over the sample controls and its a-priori bound
/// sum_{a,k} |u_{a,k}| * residual_{a,k}.
DiagnosticsReport check_structure(const OperatorSet& ops,
                                  const std::vector<std::vector<double>>& sample_controls);

/// Velocity bound, coercivity constants and the three energy estimates,
/// evaluated on a computed trajectory.
DiagnosticsReport check_energy(const OperatorSet& ops, const ControlTrajectory& ctrl,
                               const StateTrajectory& state, const ControlBasis& basis,
                               const ActuatorModel& model, int sup_samples = 64);

struct GradientCheckOptions {
  int n_probes = 10;
  double eps = 1e-5;
  std::uint64_t seed = 1;
  /// Denominator floor for the relative errors.
  double floor = 1e-12;
};

/// Directional finite differences (Richardson-extrapolated central
/// differences at eps and eps/2) against the adjoint gradient, and the
/// tangent/adjoint duality, along random feasible directions.
DiagnosticsReport check_gradients(const ControlProblem& problem, const ControlTrajectory& ctrl,
                                  const GradientCheckOptions& opts = {});

/// Random direction that keeps ctrl +- t*h inside the box for small t:
/// components at a bound point inward.
ControlTrajectory random_feasible_direction(const ControlTrajectory& ctrl, double u_max,
                                            std::uint64_t seed);

void write_report(const DiagnosticsReport& report, std::ostream& os);
void write_instant_series_csv(const DiagnosticsReport& report, double dt, std::ostream& os);

}  // namespace swarm
