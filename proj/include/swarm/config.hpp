#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "swarm/assembly.hpp"
#include "swarm/ocp.hpp"

namespace swarm {

/// Invalid configuration; the message names the offending section and key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct UniformDensity {};

struct GaussianMixture {
  std::vector<Point> centers;
  std::vector<double> widths;
  std::vector<double> weights;
};

/// Smoothed annular sector ("horseshoe"). Angles in degrees, counter-clockwise
/// from +x; the sector runs from angle_begin to angle_end.
struct AnnulusSector {
  Point center{0.5, 0.5};
  double r_inner = 0.15;
  double r_outer = 0.3;
  double angle_begin = 45.0;
  double angle_end = 315.0;
  double smoothing = 0.02;
};

using DensitySpec = std::variant<UniformDensity, GaussianMixture, AnnulusSector>;

std::function<double(Point)> density_function(const DensitySpec& spec);

struct ParticleConfig {
  std::size_t count = 100000;
  std::uint64_t seed = 42;
  int substeps = 1;
  int bins = 10;
};

struct ProblemConfig {
  double mu = 0.1;
  double alpha = 1e-4;
  double decay = 1.0;
  double horizon = 0.1;
  double dt = 0.0025;
  double u_max = 20.0;
  int nx = 15;
  int ny = 15;
  int n_basis = 10;
  BasisKind basis = BasisKind::gaussian;
  double rbf_width = 0.0;  // <= 0 selects 1/n_basis
  int quad_order = 4;
  LinearSolverKind linear_solver = LinearSolverKind::sparse_lu;
  double solver_tol = 1e-10;

  DensitySpec initial = UniformDensity{};
  DensitySpec target = UniformDensity{};

  OptimizerOptions optimizer;
  ParticleConfig particles;
  std::string output_dir = "out";

  int n_steps() const;
};

/// Sectioned key = value text (INI style); unknown keys are rejected.
ProblemConfig parse_config(std::istream& is);
ProblemConfig load_config(const std::string& path);
/// Writes a config that parses back to the same values.
void write_config(const ProblemConfig& cfg, std::ostream& os);
/// Throws ConfigError on the first invalid field.
void validate(const ProblemConfig& cfg);

/// The three-Gaussian target used by the desk-scale scenario.
GaussianMixture three_gaussian_target();

/// Everything a run needs, built from a validated config.
struct Setup {
  ProblemConfig config;
  Mesh mesh;
  ControlBasis basis;
  ActuatorModel model;
  OperatorSet ops;
  Vector initial;
  Vector target;

  ControlProblem problem() const;
  ControlTrajectory zero_control() const;
};

Setup build_setup(const ProblemConfig& cfg);

}  // namespace swarm
