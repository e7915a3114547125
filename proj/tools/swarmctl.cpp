#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <Eigen/Core>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "swarm/config.hpp"
#include "swarm/diagnostics.hpp"
#include "swarm/io.hpp"
#include "swarm/particles.hpp"

namespace fs = std::filesystem;
using namespace swarm;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Options {
  std::string config_path;
  std::string out_dir;
  std::string control_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
};

class Run {
 public:
  Run(std::string command, const Options& opts) : command_(std::move(command)), opts_(opts) {
    cfg_ = opts.config_path.empty() ? ProblemConfig{} : load_config(opts.config_path);
    if (opts.seed_given) cfg_.particles.seed = opts.seed;
    if (!opts.out_dir.empty()) cfg_.output_dir = opts.out_dir;
    validate(cfg_);
    out_ = cfg_.output_dir;
    fs::create_directories(out_);
    start_ = std::chrono::steady_clock::now();

    manifest_.set("command", command_);
    manifest_.set("swarmctl_version", kVersion);
    manifest_.set("eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                       std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                       std::to_string(EIGEN_MINOR_VERSION));
    manifest_.set("compiler", compiler());
    manifest_.set("config_path", opts.config_path.empty() ? "(defaults)" : opts.config_path);
    manifest_.set("seed", std::to_string(cfg_.particles.seed));
    manifest_.set("threads", std::to_string(threads()));
    if (!opts.control_path.empty()) manifest_.set("control_path", opts.control_path);
  }

  const ProblemConfig& config() const { return cfg_; }
  const fs::path& out() const { return out_; }
  Manifest& manifest() { return manifest_; }
  std::uint64_t seed() const { return cfg_.particles.seed; }

  /// Assembles operators and densities once; timed separately.
  const Setup& setup() {
    if (!setup_) {
      auto t0 = std::chrono::steady_clock::now();
      setup_ = std::make_unique<Setup>(build_setup(cfg_));
      timing("assembly", t0);
      spdlog::info("assembled {} nodes, {} triangles, N={} steps, {} controls",
                   setup_->mesh.n_nodes(), setup_->mesh.n_triangles(), cfg_.n_steps(),
                   setup_->zero_control().flat_size());
    }
    return *setup_;
  }

  /// Control from --control, or zero.
  ControlTrajectory control() {
    const Setup& s = setup();
    if (opts_.control_path.empty()) return s.zero_control();
    std::ifstream in(opts_.control_path);
    if (!in) throw std::runtime_error("cannot open control file '" + opts_.control_path + "'");
    ControlTrajectory u = read_control_csv(in, cfg_.n_steps(), s.basis.size(), cfg_.dt);
    if (!u.feasible(cfg_.u_max)) {
      throw std::runtime_error("control file '" + opts_.control_path +
                               "' violates the box 0 <= u <= u_max");
    }
    return u;
  }

  void timing(const std::string& what, std::chrono::steady_clock::time_point t0) {
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    manifest_.set("time_" + what + "_s", s);
  }

  std::ofstream open(const std::string& name) {
    std::ofstream os(out_ / name);
    if (!os) throw std::runtime_error("cannot write '" + (out_ / name).string() + "'");
    return os;
  }

  /// Writes config echo and manifest; the echo alone reproduces the run.
  void finish(int status) {
    {
      auto os = open("config_echo.ini");
      write_config(cfg_, os);
    }
    timing("total", start_);
    manifest_.set("exit_status", std::to_string(status));
    auto os = open("manifest.txt");
    manifest_.write(os);
    os << "config:\n";
    std::ostringstream cfg;
    write_config(cfg_, cfg);
    std::istringstream lines(cfg.str());
    for (std::string line; std::getline(lines, line);) os << "  " << line << '\n';
  }

 private:
  static std::string compiler() {
#if defined(__clang__)
    return "clang " __clang_version__;
#elif defined(__GNUC__)
    return "gcc " __VERSION__;
#else
    return "unknown";
#endif
  }

  static int threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
  }

  std::string command_;
  Options opts_;
  ProblemConfig cfg_;
  fs::path out_;
  Manifest manifest_;
  std::unique_ptr<Setup> setup_;
  std::chrono::steady_clock::time_point start_;
};

/// Interior control with entries uniform in [0, fraction * u_max].
ControlTrajectory random_control(const ControlTrajectory& shape, double u_max, double fraction,
                                 std::uint64_t seed) {
  ControlTrajectory u = shape;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, fraction * u_max);
  for (double& v : u.values()) v = dist(rng);
  return u;
}

void write_mass_csv(const OperatorSet& ops, const StateTrajectory& st, std::ostream& os) {
  os << "i,t,mass\n";
  os.precision(17);
  for (int i = 0; i <= st.n_steps(); ++i) {
    os << i << ',' << i * st.dt << ',' << total_mass(ops.M, st.q[i]) << '\n';
  }
}

void write_vector_csv(const std::vector<double>& g, const ControlTrajectory& shape,
                      std::ostream& os) {
  ControlTrajectory tmp = shape;
  tmp.values() = g;
  write_control_csv(tmp, os);
}

int cmd_mesh_info(Run& run) {
  const Setup& s = run.setup();
  const auto u = s.zero_control();
  const std::size_t nodes = s.mesh.n_nodes();
  const std::size_t n = static_cast<std::size_t>(run.config().n_steps());
  {
    auto os = run.open("nodes.csv");
    write_nodes_csv(s.mesh, os);
  }
  {
    auto os = run.open("triangles.csv");
    write_triangles_csv(s.mesh, os);
  }
  auto os = run.open("mesh_info.txt");
  for (std::ostream* o : {static_cast<std::ostream*>(&os), static_cast<std::ostream*>(&std::cout)}) {
    *o << "nodes: " << nodes << '\n'
       << "triangles: " << s.mesh.n_triangles() << '\n'
       << "boundary_edges: " << s.mesh.boundary_edges.size() << '\n'
       << "time_steps: " << n << '\n'
       << "control_dimension: " << u.flat_size() << '\n'
       << "state_stack_length: " << nodes * (n + 1) << '\n'
       << "adjoint_stack_length: " << nodes * n << '\n'
       << "nnz_mass: " << s.ops.M.nonZeros() << '\n';
  }
  return 0;
}

int cmd_forward(Run& run) {
  const Setup& s = run.setup();
  const ControlTrajectory u = run.control();
  auto t0 = std::chrono::steady_clock::now();
  const ControlProblem prob = s.problem();
  const StateTrajectory st = solve_forward(s.ops, u, prob.initial, prob.solver);
  run.timing("forward", t0);
  write_snapshots(run.out() / "state", "q", s.mesh, st.q, st.dt);
  {
    auto os = run.open("mass.csv");
    write_mass_csv(s.ops, st, os);
  }
  {
    auto os = run.open("state_final.vtk");
    write_vtk(s.mesh, st.q.back(), "density", os);
  }
  const CostBreakdown c = cost(s.ops, u, st, prob.target, prob.alpha);
  run.manifest().set("cost_total", c.total);
  run.manifest().set("cost_terminal", c.terminal);
  run.manifest().set("cost_control", c.control);

  DiagnosticsReport rep = check_energy(s.ops, u, st, s.basis, s.model);
  auto os = run.open("energy_report.txt");
  write_report(rep, os);
  return 0;
}

int cmd_adjoint(Run& run) {
  const Setup& s = run.setup();
  const ControlTrajectory u = run.control();
  auto t0 = std::chrono::steady_clock::now();
  const GradientResult g = reduced_gradient(s.problem(), u);
  run.timing("forward_adjoint", t0);
  write_snapshots(run.out() / "state", "q", s.mesh, g.state.q, g.state.dt);
  write_snapshots(run.out() / "adjoint", "p", s.mesh, g.adjoint.p, g.adjoint.dt,
                  g.adjoint.first);
  {
    auto os = run.open("gradient.csv");
    write_vector_csv(g.gradient, u, os);
  }
  run.manifest().set("cost_total", g.cost.total);
  run.manifest().set("gradient_pg_norm",
                     projected_gradient_norm(u.values(), g.gradient, run.config().u_max));
  return 0;
}

int cmd_grad_check(Run& run) {
  const Setup& s = run.setup();
  const ControlTrajectory u = run.control();
  GradientCheckOptions go;
  go.seed = run.seed();
  auto t0 = std::chrono::steady_clock::now();
  const DiagnosticsReport rep = check_gradients(s.problem(), u, go);
  run.timing("grad_check", t0);
  const bool fd_ok = *rep.gradient_fd_error <= 1e-6;
  const bool dual_ok = *rep.tangent_adjoint_error <= 1e-8;
  auto os = run.open("grad_check.txt");
  write_report(rep, os);
  os << "gradient_fd_pass: " << (fd_ok ? "true" : "false") << '\n'
     << "tangent_adjoint_pass: " << (dual_ok ? "true" : "false") << '\n';
  spdlog::info("fd error {:.3e}, duality error {:.3e}", *rep.gradient_fd_error,
               *rep.tangent_adjoint_error);
  return fd_ok && dual_ok ? 0 : 1;
}

int cmd_optimize(Run& run) {
  const Setup& s = run.setup();
  const ControlTrajectory guess = run.control();
  const ControlProblem prob = s.problem();
  auto t0 = std::chrono::steady_clock::now();
  const OptResult res = optimize(prob, run.config().optimizer, guess, [](const IterationRecord& r) {
    spdlog::debug("iter {:4d}  J={:.10e}  pg={:.3e}  step={:.3e}", r.iter, r.cost, r.pg_norm,
                  r.step);
  });
  run.timing("optimize", t0);
  {
    auto os = run.open("history.csv");
    write_history_csv(res.history, os);
  }
  {
    auto os = run.open("control.csv");
    write_control_csv(res.control, os);
  }
  {
    auto os = run.open("control_profiles.csv");
    write_control_profiles_csv(res.control, s.basis, 41, os);
  }
  const StateTrajectory st = solve_forward(s.ops, res.control, prob.initial, prob.solver);
  write_snapshots(run.out() / "state", "q", s.mesh, st.q, st.dt);
  {
    auto os = run.open("state_final.vtk");
    write_vtk(s.mesh, st.q.back(), "density", os);
  }
  {
    auto os = run.open("target.vtk");
    write_vtk(s.mesh, prob.target, "target", os);
  }
  const DiagnosticsReport rep = check_energy(s.ops, res.control, st, s.basis, s.model);
  {
    auto os = run.open("energy_report.txt");
    write_report(rep, os);
  }
  const double j0 = res.history.empty() ? res.final_cost.total : res.history.front().cost;
  run.manifest().set("status", to_string(res.status));
  run.manifest().set("iterations", std::to_string(res.iterations));
  run.manifest().set("initial_cost", j0);
  run.manifest().set("final_cost", res.final_cost.total);
  run.manifest().set("relative_reduction",
                     j0 > 0.0 ? 1.0 - res.final_cost.total / j0 : 0.0);
  spdlog::info("optimize: {} after {} iterations, J {:.6e} -> {:.6e}", to_string(res.status),
               res.iterations, j0, res.final_cost.total);
  return 0;
}

int cmd_particles(Run& run) {
  const Setup& s = run.setup();
  const ControlTrajectory u = run.control();
  const ProblemConfig& cfg = run.config();
  if (!std::holds_alternative<UniformDensity>(cfg.initial)) {
    throw ConfigError("config error: [initial] kind: particle runs start from a uniform ensemble");
  }
  auto t0 = std::chrono::steady_clock::now();
  ParticleEnsemble ens = uniform_ensemble(cfg.particles.count, cfg.particles.seed);
  ens = simulate(std::move(ens), u, s.basis, s.model, {cfg.mu, cfg.particles.substeps});
  run.timing("particles", t0);

  const StateTrajectory st = solve_forward(s.ops, u, s.initial, s.problem().solver);
  const BinnedDensity emp = empirical_density(ens, cfg.particles.bins);
  const BinnedDensity pde = bin_average(s.mesh, {st.q.back().data(), static_cast<std::size_t>(st.q.back().size())}, cfg.particles.bins);
  const DensityDistance d = distance(emp, pde);
  {
    auto os = run.open("particles_final.csv");
    write_particles_csv(ens, os);
  }
  {
    auto os = run.open("binned_empirical.csv");
    write_binned_csv(emp, os);
  }
  {
    auto os = run.open("binned_pde.csv");
    write_binned_csv(pde, os);
  }
  run.manifest().set("binned_l1", d.l1);
  run.manifest().set("binned_l2", d.l2);
  spdlog::info("particles: L1 {:.4e}, L2 {:.4e}", d.l1, d.l2);
  return 0;
}

int cmd_verify(Run& run) {
  const Setup& s = run.setup();
  const ProblemConfig& cfg = run.config();
  const ControlProblem prob = s.problem();
  const ControlTrajectory shape = s.zero_control();

  std::vector<std::vector<double>> samples;
  std::mt19937_64 rng(run.seed());
  std::uniform_real_distribution<double> dist(0.0, cfg.u_max);
  for (int j = 0; j < 20; ++j) {
    std::vector<double> u(shape.per_instant());
    for (double& v : u) v = dist(rng);
    samples.push_back(std::move(u));
  }
  auto t0 = std::chrono::steady_clock::now();
  DiagnosticsReport rep = check_structure(s.ops, samples);
  run.timing("structure", t0);

  const ControlTrajectory u = random_control(shape, cfg.u_max, 0.25, run.seed() + 1);
  t0 = std::chrono::steady_clock::now();
  const StateTrajectory st = solve_forward(s.ops, u, prob.initial, prob.solver);
  rep.merge(check_energy(s.ops, u, st, s.basis, s.model));
  run.timing("energy", t0);

  GradientCheckOptions go;
  go.seed = run.seed() + 2;
  t0 = std::chrono::steady_clock::now();
  rep.merge(check_gradients(prob, u, go));
  run.timing("gradients", t0);

  const bool comm_ok = *rep.commutation_residual <= 2.0 * *rep.commutation_bound + 1e-13;
  const bool mass_ok = *rep.mass_drift <= 1e-7;
  const bool fd_ok = *rep.gradient_fd_error <= 1e-6;
  const bool dual_ok = *rep.tangent_adjoint_error <= 1e-8;
  const bool bounds_ok = rep.all_bounds_pass();
  const bool all_ok = comm_ok && mass_ok && fd_ok && dual_ok && bounds_ok;

  auto b = [](bool v) { return v ? "true" : "false"; };
  {
    auto os = run.open("verify_report.txt");
    write_report(rep, os);
    os << "commutation_pass: " << b(comm_ok) << '\n'
       << "mass_pass: " << b(mass_ok) << '\n'
       << "gradient_fd_pass: " << b(fd_ok) << '\n'
       << "tangent_adjoint_pass: " << b(dual_ok) << '\n'
       << "all_pass: " << b(all_ok) << '\n';
  }
  {
    auto os = run.open("instant_series.csv");
    write_instant_series_csv(rep, cfg.dt, os);
  }
  spdlog::info("verify: commutation {} mass {} fd {} duality {} bounds {}", b(comm_ok),
               b(mass_ok), b(fd_ok), b(dual_ok), b(bounds_ok));
  return all_ok ? 0 : 1;
}

void configure_logging() {
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("SWARM_LOG")) {
    const auto lvl = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honour "off" when asked for.
    if (lvl != spdlog::level::off || std::string(env) == "off") spdlog::set_level(lvl);
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Boundary-actuated swarm density control"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Options opts;
  using Handler = int (*)(Run&);
  const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
      {"verify", "Run the full diagnostics suite", cmd_verify},
      {"forward", "Forward state solve", cmd_forward},
      {"adjoint", "Forward and discrete adjoint solve, reduced gradient", cmd_adjoint},
      {"grad-check", "Adjoint gradient against finite differences and the tangent", cmd_grad_check},
      {"optimize", "Box-constrained optimal control", cmd_optimize},
      {"particles", "Particle simulation compared with the PDE", cmd_particles},
      {"mesh-info", "Mesh and problem dimensions", cmd_mesh_info},
  };
  Handler chosen = nullptr;
  std::string chosen_name;
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config_path, "Config file (INI)")->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out_dir, "Output directory (overrides [output] dir)");
    sub->add_option("--seed", opts.seed, "Random seed (overrides [particles] seed)")
        ->each([&opts](const std::string&) { opts.seed_given = true; });
    sub->add_option("--threads", opts.threads, "OpenMP threads (0 = runtime default)")
        ->check(CLI::NonNegativeNumber);
    if (name != "mesh-info" && name != "verify") {
      sub->add_option("--control", opts.control_path, "Control CSV (i,a,k,value); default zero")
          ->check(CLI::ExistingFile);
    }
    sub->callback([&chosen, &chosen_name, fn = fn, name = name] {
      chosen = fn;
      chosen_name = name;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

#ifdef _OPENMP
  if (opts.threads > 0) omp_set_num_threads(opts.threads);
#endif

  try {
    Run run(chosen_name, opts);
    const int status = chosen(run);
    run.finish(status);
    return status;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver error in " << chosen_name << ": " << e.what() << '\n';
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "error in " << chosen_name << ": " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error in " << chosen_name << ": " << e.what() << '\n';
    return 1;
  }
}
