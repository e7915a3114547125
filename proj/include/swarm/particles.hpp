#pragma once

#include <cstdint>
#include <vector>

#include "swarm/actuation.hpp"
#include "swarm/mesh.hpp"

namespace swarm {

/// Noninteracting particles in the closed unit square. The random stream of
/// each particle is a pure function of (seed, particle index, substep
/// counter), so results do not depend on the thread count.
struct ParticleEnsemble {
  std::vector<Point> positions;
  std::uint64_t seed = 0;
  double time = 0.0;
  std::uint64_t substeps_taken = 0;
};

/// Positions drawn uniformly from the square.
ParticleEnsemble uniform_ensemble(std::size_t count, std::uint64_t seed);

/// Coordinate-wise mirror reflection into [0,1], repeated until inside.
double reflect_unit(double x);

struct SimulationOptions {
  double mu = 0.1;
  int substeps_per_dt = 1;
};

/// Euler–Maruyama over the whole control horizon starting at ensemble.time
/// (which must be 0) with control coefficients linear in time between
/// instants. Throws std::domain_error if a substep is too large for the
/// single-reflection guard.
ParticleEnsemble simulate(ParticleEnsemble ensemble, const ControlTrajectory& ctrl,
                          const ControlBasis& basis, const ActuatorModel& model,
                          const SimulationOptions& opts);

/// Advance by `n_intervals` control intervals starting at interval `first`.
void advance(ParticleEnsemble& ensemble, const ControlTrajectory& ctrl,
             const ControlBasis& basis, const ActuatorModel& model,
             const SimulationOptions& opts, int first, int n_intervals);

/// Histogram density on bins x bins cells, normalised to integrate to 1.
struct BinnedDensity {
  int bins = 0;
  std::vector<double> values;  // row-major, values[j*bins + i] for cell (i, j)

  double cell_area() const { return 1.0 / (static_cast<double>(bins) * bins); }
  double integral() const;
};

BinnedDensity empirical_density(const ParticleEnsemble& ensemble, int bins);

/// Cell averages of a P1 field.
BinnedDensity bin_average(const Mesh& mesh, std::span<const double> nodal, int bins,
                          int samples_per_axis = 4);

struct DensityDistance {
  double l1 = 0.0;
  double l2 = 0.0;
};

/// L1 and L2 distances between two binned densities of equal resolution.
DensityDistance distance(const BinnedDensity& a, const BinnedDensity& b);

/// Compare an empirical histogram with a PDE snapshot averaged per bin.
DensityDistance compare(const BinnedDensity& binned, std::span<const double> nodal,
                        const Mesh& mesh);

}  // namespace swarm
