#include "swarm/particles.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "swarm/quadrature.hpp"

namespace swarm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based generator: a fresh engine per (seed, particle, substep).
class StreamEngine {
 public:
  using result_type = std::uint64_t;
  StreamEngine(std::uint64_t seed, std::uint64_t particle, std::uint64_t step)
      : state_(splitmix64(splitmix64(seed ^ 0xA0761D6478BD642FULL) ^ particle) ^
               splitmix64(step + 0xE7037ED1A0B428DBULL)) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

double unit_uniform(StreamEngine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Box–Muller; kept local so the stream is identical across standard libraries.
std::array<double, 2> normal_pair(StreamEngine& eng) {
  double u1 = unit_uniform(eng);
  while (u1 <= 0.0) u1 = unit_uniform(eng);
  const double u2 = unit_uniform(eng);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double th = 2.0 * M_PI * u2;
  return {r * std::cos(th), r * std::sin(th)};
}

}  // namespace

ParticleEnsemble uniform_ensemble(std::size_t count, std::uint64_t seed) {
  ParticleEnsemble e;
  e.seed = seed;
  e.positions.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    // Substep counter value reserved for initial placement.
    StreamEngine eng(seed, i, ~std::uint64_t{0});
    e.positions[i] = {unit_uniform(eng), unit_uniform(eng)};
  }
  return e;
}

double reflect_unit(double x) {
  while (x < 0.0 || x > 1.0) {
    if (x < 0.0) x = -x;
    if (x > 1.0) x = 2.0 - x;
  }
  return x;
}

void advance(ParticleEnsemble& ensemble, const ControlTrajectory& ctrl,
             const ControlBasis& basis, const ActuatorModel& model,
             const SimulationOptions& opts, int first, int n_intervals) {
  if (opts.substeps_per_dt < 1) {
    throw std::invalid_argument("simulate: substeps_per_dt must be >= 1");
  }
  if (opts.mu < 0.0) throw std::invalid_argument("simulate: mu must be >= 0");
  if (first < 0 || first + n_intervals > ctrl.n_steps()) {
    throw std::invalid_argument("simulate: interval range outside the control horizon");
  }
  const double dt = ctrl.dt();
  const double h = dt / opts.substeps_per_dt;
  const double noise = std::sqrt(2.0 * opts.mu * h);
  const std::size_t width = ctrl.per_instant();

  // Step-size guard uses the largest possible speed: every stack at full
  // intensity bound by the sup of its basis sum.
  double vmax = 0.0;
  for (int i = first; i <= first + n_intervals; ++i) {
    double inst = 0.0;
    for (Side side : kAllSides) inst += side_sup_norm(ctrl.instant(i), basis, side, 65);
    vmax = std::max(vmax, inst);
  }
  if (vmax * h + 6.0 * noise >= 1.0) {
    throw std::domain_error("simulate: substep too large for mirror reflection (|v|dt + "
                            "6 sqrt(2 mu dt) >= 1); increase substeps_per_dt");
  }

  std::vector<double> coeffs(width);
  for (int interval = first; interval < first + n_intervals; ++interval) {
    const auto u0 = ctrl.instant(interval);
    const auto u1 = ctrl.instant(interval + 1);
    for (int sub = 0; sub < opts.substeps_per_dt; ++sub) {
      const double theta = static_cast<double>(sub) / opts.substeps_per_dt;
      for (std::size_t j = 0; j < width; ++j) coeffs[j] = (1.0 - theta) * u0[j] + theta * u1[j];
      const std::uint64_t step_id = ensemble.substeps_taken;
      const auto n = static_cast<std::int64_t>(ensemble.positions.size());
#pragma omp parallel for schedule(static)
      for (std::int64_t p = 0; p < n; ++p) {
        Point& x = ensemble.positions[static_cast<std::size_t>(p)];
        const auto v = eval_velocity(coeffs, basis, model, x);
        double nx = x.x + v[0] * h;
        double ny = x.y + v[1] * h;
        if (noise > 0.0) {
          StreamEngine eng(ensemble.seed, static_cast<std::uint64_t>(p), step_id);
          const auto xi = normal_pair(eng);
          nx += noise * xi[0];
          ny += noise * xi[1];
        }
        x = {reflect_unit(nx), reflect_unit(ny)};
      }
      ++ensemble.substeps_taken;
    }
  }
  ensemble.time += n_intervals * dt;
}

ParticleEnsemble simulate(ParticleEnsemble ensemble, const ControlTrajectory& ctrl,
                          const ControlBasis& basis, const ActuatorModel& model,
                          const SimulationOptions& opts) {
  advance(ensemble, ctrl, basis, model, opts, 0, ctrl.n_steps());
  return ensemble;
}

double BinnedDensity::integral() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * cell_area();
}

BinnedDensity empirical_density(const ParticleEnsemble& ensemble, int bins) {
  if (ensemble.positions.empty()) {
    throw std::invalid_argument("empirical_density: ensemble is empty");
  }
  if (bins < 1) throw std::invalid_argument("empirical_density: bins must be >= 1");
  BinnedDensity d;
  d.bins = bins;
  d.values.assign(static_cast<std::size_t>(bins) * bins, 0.0);
  for (const Point& x : ensemble.positions) {
    const int i = std::min(static_cast<int>(x.x * bins), bins - 1);
    const int j = std::min(static_cast<int>(x.y * bins), bins - 1);
    d.values[static_cast<std::size_t>(j) * bins + i] += 1.0;
  }
  const double scale =
      static_cast<double>(bins) * bins / static_cast<double>(ensemble.positions.size());
  for (double& v : d.values) v *= scale;
  return d;
}

BinnedDensity bin_average(const Mesh& mesh, std::span<const double> nodal, int bins,
                          int samples_per_axis) {
  if (bins < 1) throw std::invalid_argument("bin_average: bins must be >= 1");
  const LineRule rule = gauss_legendre(samples_per_axis);
  BinnedDensity d;
  d.bins = bins;
  d.values.assign(static_cast<std::size_t>(bins) * bins, 0.0);
  for (int j = 0; j < bins; ++j) {
    for (int i = 0; i < bins; ++i) {
      double avg = 0.0;
      for (std::size_t a = 0; a < rule.points.size(); ++a) {
        for (std::size_t b = 0; b < rule.points.size(); ++b) {
          const Point x{(i + rule.points[a]) / bins, (j + rule.points[b]) / bins};
          avg += rule.weights[a] * rule.weights[b] * mesh.evaluate(nodal, x);
        }
      }
      d.values[static_cast<std::size_t>(j) * bins + i] = avg;
    }
  }
  return d;
}

DensityDistance distance(const BinnedDensity& a, const BinnedDensity& b) {
  if (a.bins != b.bins) {
    throw std::invalid_argument("distance: bin counts differ (" + std::to_string(a.bins) +
                                " vs " + std::to_string(b.bins) + ")");
  }
  DensityDistance out;
  for (std::size_t c = 0; c < a.values.size(); ++c) {
    const double diff = a.values[c] - b.values[c];
    out.l1 += std::abs(diff);
    out.l2 += diff * diff;
  }
  out.l1 *= a.cell_area();
  out.l2 = std::sqrt(out.l2 * a.cell_area());
  return out;
}

DensityDistance compare(const BinnedDensity& binned, std::span<const double> nodal,
                        const Mesh& mesh) {
  return distance(binned, bin_average(mesh, nodal, binned.bins));
}

}  // namespace swarm
