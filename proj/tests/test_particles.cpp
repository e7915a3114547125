#include <doctest.h>

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "swarm/assembly.hpp"
#include "swarm/particles.hpp"

using namespace swarm;

TEST_CASE("mirror reflection") {
  CHECK(reflect_unit(0.3) == 0.3);
  CHECK(reflect_unit(-0.2) == doctest::Approx(0.2));
  CHECK(reflect_unit(1.25) == doctest::Approx(0.75));
  CHECK(reflect_unit(-1.5) == doctest::Approx(0.5));
  CHECK(reflect_unit(2.4) == doctest::Approx(0.4));
  CHECK(reflect_unit(0.0) == 0.0);
  CHECK(reflect_unit(1.0) == 1.0);
}

TEST_CASE("uniform ensemble: every bin within 6 binomial sigmas") {
  const std::size_t n = 200000;
  const ParticleEnsemble e = uniform_ensemble(n, 99);
  const int bins = 10;
  const BinnedDensity d = empirical_density(e, bins);
  CHECK(d.integral() == doctest::Approx(1.0).epsilon(1e-12));
  const double p = 1.0 / (bins * bins);
  const double sigma = std::sqrt(n * p * (1 - p));
  for (double v : d.values) {
    const double count = v * d.cell_area() * static_cast<double>(n);
    CHECK(std::abs(count - n * p) <= 6.0 * sigma);
  }
}

TEST_CASE("seeded runs are reproducible and seed-sensitive") {
  const ControlBasis b = ControlBasis::gaussian(2);
  const ActuatorModel m{1.0, 5.0};
  ControlTrajectory u(4, 2, 0.01);
  for (double& v : u.values()) v = 2.0;
  const auto a = simulate(uniform_ensemble(1000, 5), u, b, m, {0.1, 2});
  const auto c = simulate(uniform_ensemble(1000, 5), u, b, m, {0.1, 2});
  const auto d = simulate(uniform_ensemble(1000, 6), u, b, m, {0.1, 2});
  bool same = true, differs = false;
  for (std::size_t i = 0; i < 1000; ++i) {
    same = same && a.positions[i].x == c.positions[i].x && a.positions[i].y == c.positions[i].y;
    differs = differs || a.positions[i].x != d.positions[i].x;
  }
  CHECK(same);
  CHECK(differs);
  CHECK(a.time == doctest::Approx(0.04));
  CHECK(a.substeps_taken == 8);
}

TEST_CASE("results do not depend on the thread count") {
#ifdef _OPENMP
  const ControlBasis b = ControlBasis::gaussian(2);
  const ActuatorModel m{1.0, 5.0};
  ControlTrajectory u(3, 2, 0.01);
  for (double& v : u.values()) v = 1.0;
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto a = simulate(uniform_ensemble(5000, 3), u, b, m, {0.1, 1});
  omp_set_num_threads(4);
  const auto c = simulate(uniform_ensemble(5000, 3), u, b, m, {0.1, 1});
  omp_set_num_threads(saved);
  for (std::size_t i = 0; i < 5000; ++i) {
    REQUIRE(a.positions[i].x == c.positions[i].x);
    REQUIRE(a.positions[i].y == c.positions[i].y);
  }
#endif
}

TEST_CASE("split advance equals one-shot simulation") {
  const ControlBasis b = ControlBasis::gaussian(2);
  const ActuatorModel m{1.0, 5.0};
  ControlTrajectory u(6, 2, 0.01);
  for (std::size_t j = 0; j < u.flat_size(); ++j) u.values()[j] = 0.5 * (j % 7);
  const auto whole = simulate(uniform_ensemble(500, 8), u, b, m, {0.1, 3});
  auto part = uniform_ensemble(500, 8);
  advance(part, u, b, m, {0.1, 3}, 0, 2);
  advance(part, u, b, m, {0.1, 3}, 2, 4);
  for (std::size_t i = 0; i < 500; ++i) CHECK(part.positions[i].x == whole.positions[i].x);
}

TEST_CASE("deterministic drift without noise") {
  // Constant unit push from the left at c = 0 moves every particle by dt.
  const ControlBasis b = ControlBasis::constant();
  const ActuatorModel m{0.0, 1.0};
  ControlTrajectory u(2, 1, 0.1);
  for (int i = 0; i <= 2; ++i) u.at(i, Side::left, 0) = 1.0;
  ParticleEnsemble e;
  e.positions = {{0.2, 0.5}, {0.95, 0.1}};
  e = simulate(e, u, b, m, {0.0, 1});
  CHECK(e.positions[0].x == doctest::Approx(0.4));
  CHECK(e.positions[0].y == doctest::Approx(0.5));
  CHECK(e.positions[1].x == doctest::Approx(0.95));  // reflected at x = 1 each step
}

TEST_CASE("step-size guard") {
  const ControlBasis b = ControlBasis::constant();
  const ActuatorModel m{0.0, 100.0};
  ControlTrajectory u(1, 1, 0.1);
  for (double& v : u.values()) v = 100.0;
  ParticleEnsemble e = uniform_ensemble(10, 1);
  CHECK_THROWS_AS(simulate(e, u, b, m, {0.1, 1}), std::domain_error);
  CHECK_NOTHROW(simulate(e, u, b, m, {0.1, 4000}));
}

TEST_CASE("bin averages and distances") {
  const Mesh mesh = build_structured_mesh(6, 6);
  std::vector<double> f(mesh.n_nodes());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = 1.0 + mesh.nodes[i].x;  // mean 1.5
  const BinnedDensity avg = bin_average(mesh, f, 4);
  CHECK(avg.values[0] == doctest::Approx(1.125));
  CHECK(avg.values[3] == doctest::Approx(1.875));
  CHECK(avg.integral() == doctest::Approx(1.5));

  BinnedDensity a{2, {1, 1, 1, 1}}, c{2, {2, 0, 1, 1}};
  const DensityDistance d = distance(a, c);
  CHECK(d.l1 == doctest::Approx(0.5));
  CHECK(d.l2 == doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS(distance(a, BinnedDensity{3, std::vector<double>(9, 1.0)}));
}

TEST_CASE("particles on the boundary land in the last bin") {
  ParticleEnsemble e;
  e.positions = {{1.0, 1.0}, {0.0, 0.0}};
  const BinnedDensity d = empirical_density(e, 2);
  CHECK(d.values[3] == doctest::Approx(2.0));
  CHECK(d.values[0] == doctest::Approx(2.0));
}
