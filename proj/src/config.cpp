#include "swarm/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace swarm {

namespace pt = boost::property_tree;

namespace {

double smooth_step(double x) { return 0.5 * (1.0 + std::tanh(x)); }

std::string field(const std::string& section, const std::string& key) {
  return "[" + section + "] " + key;
}

template <typename T>
T parse_value(const std::string& section, const std::string& key, const std::string& text) {
  std::istringstream is(text);
  T v{};
  is >> v;
  std::string rest;
  if (is.fail() || (is >> rest)) {
    throw ConfigError("config error: " + field(section, key) + ": cannot parse '" + text + "'");
  }
  return v;
}

std::vector<double> parse_list(const std::string& section, const std::string& key,
                               const std::string& text) {
  std::string cleaned = text;
  for (char& c : cleaned) {
    if (c == ',' || c == ';') c = ' ';
  }
  std::istringstream is(cleaned);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) out.push_back(parse_value<double>(section, key, tok));
  return out;
}

std::vector<Point> parse_points(const std::string& section, const std::string& key,
                                const std::string& text) {
  const auto flat = parse_list(section, key, text);
  if (flat.size() % 2 != 0) {
    throw ConfigError("config error: " + field(section, key) +
                      ": expected x y pairs, got an odd number of values");
  }
  std::vector<Point> pts;
  for (std::size_t i = 0; i < flat.size(); i += 2) pts.push_back({flat[i], flat[i + 1]});
  return pts;
}

class Section {
 public:
  Section(const pt::ptree& root, std::string name) : name_(std::move(name)) {
    if (auto child = root.get_child_optional(name_)) tree_ = *child;
  }

  template <typename T>
  void read(const std::string& key, T& dst) {
    used_.insert(key);
    if (auto v = tree_.get_optional<std::string>(key)) dst = parse_value<T>(name_, key, *v);
  }

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    if (auto v = tree_.get_optional<std::string>(key)) return *v;
    return std::nullopt;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : tree_) {
      if (!used_.count(key)) {
        throw ConfigError("config error: " + field(name_, key) + ": unknown key");
      }
    }
  }

  const std::string& name() const { return name_; }

 private:
  std::string name_;
  pt::ptree tree_;
  std::set<std::string> used_;
};

DensitySpec read_density(Section& sec) {
  std::string kind = "uniform";
  if (auto k = sec.raw("kind")) kind = *k;
  if (kind == "uniform") return UniformDensity{};
  if (kind == "gaussian-mixture") {
    GaussianMixture g;
    if (auto v = sec.raw("centers")) g.centers = parse_points(sec.name(), "centers", *v);
    if (auto v = sec.raw("widths")) g.widths = parse_list(sec.name(), "widths", *v);
    if (auto v = sec.raw("weights")) g.weights = parse_list(sec.name(), "weights", *v);
    if (g.weights.empty()) g.weights.assign(g.centers.size(), 1.0);
    return g;
  }
  if (kind == "annulus-sector") {
    AnnulusSector a;
    if (auto v = sec.raw("center")) {
      const auto p = parse_points(sec.name(), "center", *v);
      if (p.size() != 1) throw ConfigError("config error: " + field(sec.name(), "center") + ": expected one point");
      a.center = p[0];
    }
    if (auto v = sec.raw("radii")) {
      const auto r = parse_list(sec.name(), "radii", *v);
      if (r.size() != 2) throw ConfigError("config error: " + field(sec.name(), "radii") + ": expected inner outer");
      a.r_inner = r[0];
      a.r_outer = r[1];
    }
    if (auto v = sec.raw("angles")) {
      const auto r = parse_list(sec.name(), "angles", *v);
      if (r.size() != 2) throw ConfigError("config error: " + field(sec.name(), "angles") + ": expected begin end");
      a.angle_begin = r[0];
      a.angle_end = r[1];
    }
    sec.read("smoothing", a.smoothing);
    return a;
  }
  throw ConfigError("config error: " + field(sec.name(), "kind") + ": unknown density kind '" +
                    kind + "' (uniform | gaussian-mixture | annulus-sector)");
}

void validate_density(const std::string& section, const DensitySpec& spec) {
  if (const auto* g = std::get_if<GaussianMixture>(&spec)) {
    if (g->centers.empty()) throw ConfigError("config error: " + field(section, "centers") + ": at least one center required");
    if (g->widths.size() != g->centers.size()) throw ConfigError("config error: " + field(section, "widths") + ": need one width per center");
    if (g->weights.size() != g->centers.size()) throw ConfigError("config error: " + field(section, "weights") + ": need one weight per center");
    for (double w : g->widths) {
      if (!(w > 0.0)) throw ConfigError("config error: " + field(section, "widths") + ": widths must be > 0");
    }
    for (double w : g->weights) {
      if (!(w >= 0.0)) throw ConfigError("config error: " + field(section, "weights") + ": weights must be >= 0");
    }
  } else if (const auto* a = std::get_if<AnnulusSector>(&spec)) {
    if (!(a->r_inner >= 0.0 && a->r_outer > a->r_inner)) {
      throw ConfigError("config error: " + field(section, "radii") + ": need 0 <= inner < outer");
    }
    if (!(a->smoothing > 0.0)) throw ConfigError("config error: " + field(section, "smoothing") + ": must be > 0");
  }
}

void write_density(const DensitySpec& spec, std::ostream& os) {
  if (std::holds_alternative<UniformDensity>(spec)) {
    os << "kind = uniform\n";
  } else if (const auto* g = std::get_if<GaussianMixture>(&spec)) {
    os << "kind = gaussian-mixture\ncenters =";
    for (std::size_t i = 0; i < g->centers.size(); ++i) {
      os << (i ? "; " : " ") << g->centers[i].x << ' ' << g->centers[i].y;
    }
    os << "\nwidths =";
    for (double w : g->widths) os << ' ' << w;
    os << "\nweights =";
    for (double w : g->weights) os << ' ' << w;
    os << '\n';
  } else if (const auto* a = std::get_if<AnnulusSector>(&spec)) {
    os << "kind = annulus-sector\n"
       << "center = " << a->center.x << ' ' << a->center.y << '\n'
       << "radii = " << a->r_inner << ' ' << a->r_outer << '\n'
       << "angles = " << a->angle_begin << ' ' << a->angle_end << '\n'
       << "smoothing = " << a->smoothing << '\n';
  }
}

}  // namespace

std::function<double(Point)> density_function(const DensitySpec& spec) {
  if (std::holds_alternative<UniformDensity>(spec)) {
    return [](Point) { return 1.0; };
  }
  if (const auto* g = std::get_if<GaussianMixture>(&spec)) {
    return [g = *g](Point x) {
      double v = 0.0;
      for (std::size_t i = 0; i < g.centers.size(); ++i) {
        const double dx = x.x - g.centers[i].x;
        const double dy = x.y - g.centers[i].y;
        const double s = g.widths[i];
        v += g.weights[i] * std::exp(-(dx * dx + dy * dy) / (2.0 * s * s));
      }
      return v;
    };
  }
  const auto a = std::get<AnnulusSector>(spec);
  return [a](Point x) {
    const double dx = x.x - a.center.x;
    const double dy = x.y - a.center.y;
    const double r = std::hypot(dx, dy);
    const double radial =
        smooth_step((r - a.r_inner) / a.smoothing) * smooth_step((a.r_outer - r) / a.smoothing);
    // Angle measured from the sector start, in [0, 360).
    double theta = std::atan2(dy, dx) * 180.0 / M_PI - a.angle_begin;
    theta = std::fmod(std::fmod(theta, 360.0) + 360.0, 360.0);
    const double span = std::fmod(std::fmod(a.angle_end - a.angle_begin, 360.0) + 360.0, 360.0);
    const double arc = std::max(r, 1e-12) * M_PI / 180.0;  // length per degree
    const double angular =
        smooth_step(theta * arc / a.smoothing) * smooth_step((span - theta) * arc / a.smoothing);
    return radial * angular;
  };
}

int ProblemConfig::n_steps() const {
  return static_cast<int>(std::lround(horizon / dt));
}

void validate(const ProblemConfig& c) {
  auto positive = [](const char* key, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string("config error: [problem] ") + key + ": must be > 0");
    }
  };
  positive("mu", c.mu);
  positive("alpha", c.alpha);
  positive("T", c.horizon);
  positive("dt", c.dt);
  positive("u_max", c.u_max);
  if (!(c.decay >= 0.0)) throw ConfigError("config error: [problem] decay: must be >= 0");
  const double steps = c.horizon / c.dt;
  if (std::lround(steps) < 1 || std::abs(steps - std::lround(steps)) > 1e-9 * steps) {
    throw ConfigError("config error: [problem] dt: T/dt must be a positive integer");
  }
  if (c.nx < 1) throw ConfigError("config error: [problem] nx: must be >= 1");
  if (c.ny < 1) throw ConfigError("config error: [problem] ny: must be >= 1");
  if (c.n_basis < 1) throw ConfigError("config error: [problem] n_basis: must be >= 1");
  if (c.basis == BasisKind::constant && c.n_basis != 1) {
    throw ConfigError("config error: [problem] n_basis: constant basis has exactly one function");
  }
  if (c.quad_order < 2) throw ConfigError("config error: [problem] quad_order: must be >= 2");
  positive("solver_tol", c.solver_tol);
  validate_density("initial", c.initial);
  validate_density("target", c.target);
  if (c.optimizer.max_iters < 0) throw ConfigError("config error: [optimizer] max_iters: must be >= 0");
  if (c.optimizer.patience < 1) throw ConfigError("config error: [optimizer] patience: must be >= 1");
  if (c.particles.count < 1) throw ConfigError("config error: [particles] count: must be >= 1");
  if (c.particles.substeps < 1) throw ConfigError("config error: [particles] substeps: must be >= 1");
  if (c.particles.bins < 1) throw ConfigError("config error: [particles] bins: must be >= 1");
}

ProblemConfig parse_config(std::istream& is) {
  pt::ptree root;
  try {
    pt::read_ini(is, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
  static const std::set<std::string> known = {"problem", "initial", "target",
                                              "optimizer", "particles", "output"};
  for (const auto& [name, child] : root) {
    if (!known.count(name)) {
      if (child.empty()) throw ConfigError("config error: key '" + name + "' outside a section");
      throw ConfigError("config error: unknown section [" + name + "]");
    }
  }

  ProblemConfig c;
  Section p(root, "problem");
  p.read("mu", c.mu);
  p.read("alpha", c.alpha);
  p.read("decay", c.decay);
  p.read("T", c.horizon);
  p.read("dt", c.dt);
  p.read("u_max", c.u_max);
  p.read("nx", c.nx);
  p.read("ny", c.ny);
  p.read("n_basis", c.n_basis);
  p.read("rbf_width", c.rbf_width);
  p.read("quad_order", c.quad_order);
  p.read("solver_tol", c.solver_tol);
  if (auto b = p.raw("basis")) {
    if (*b == "gaussian") c.basis = BasisKind::gaussian;
    else if (*b == "constant") c.basis = BasisKind::constant;
    else throw ConfigError("config error: [problem] basis: expected gaussian | constant");
  }
  if (auto s = p.raw("linear_solver")) {
    if (*s == "sparse-lu") c.linear_solver = LinearSolverKind::sparse_lu;
    else if (*s == "bicgstab") c.linear_solver = LinearSolverKind::bicgstab;
    else throw ConfigError("config error: [problem] linear_solver: expected sparse-lu | bicgstab");
  }
  p.reject_unknown();

  Section init(root, "initial");
  c.initial = read_density(init);
  init.reject_unknown();
  Section targ(root, "target");
  c.target = read_density(targ);
  targ.reject_unknown();

  Section opt(root, "optimizer");
  opt.read("tol_g", c.optimizer.tol_g);
  opt.read("tol_f", c.optimizer.tol_f);
  opt.read("patience", c.optimizer.patience);
  opt.read("max_iters", c.optimizer.max_iters);
  opt.reject_unknown();

  Section part(root, "particles");
  part.read("count", c.particles.count);
  part.read("seed", c.particles.seed);
  part.read("substeps", c.particles.substeps);
  part.read("bins", c.particles.bins);
  part.reject_unknown();

  Section out(root, "output");
  if (auto d = out.raw("dir")) c.output_dir = *d;
  out.reject_unknown();

  validate(c);
  return c;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config error: cannot open '" + path + "'");
  return parse_config(in);
}

void write_config(const ProblemConfig& c, std::ostream& os) {
  const auto old = os.precision(17);
  os << "[problem]\n"
     << "mu = " << c.mu << '\n'
     << "alpha = " << c.alpha << '\n'
     << "decay = " << c.decay << '\n'
     << "T = " << c.horizon << '\n'
     << "dt = " << c.dt << '\n'
     << "u_max = " << c.u_max << '\n'
     << "nx = " << c.nx << '\n'
     << "ny = " << c.ny << '\n'
     << "n_basis = " << c.n_basis << '\n'
     << "basis = " << (c.basis == BasisKind::gaussian ? "gaussian" : "constant") << '\n'
     << "rbf_width = " << c.rbf_width << '\n'
     << "quad_order = " << c.quad_order << '\n'
     << "linear_solver = "
     << (c.linear_solver == LinearSolverKind::sparse_lu ? "sparse-lu" : "bicgstab") << '\n'
     << "solver_tol = " << c.solver_tol << "\n\n[initial]\n";
  write_density(c.initial, os);
  os << "\n[target]\n";
  write_density(c.target, os);
  os << "\n[optimizer]\n"
     << "tol_g = " << c.optimizer.tol_g << '\n'
     << "tol_f = " << c.optimizer.tol_f << '\n'
     << "patience = " << c.optimizer.patience << '\n'
     << "max_iters = " << c.optimizer.max_iters << "\n\n[particles]\n"
     << "count = " << c.particles.count << '\n'
     << "seed = " << c.particles.seed << '\n'
     << "substeps = " << c.particles.substeps << '\n'
     << "bins = " << c.particles.bins << "\n\n[output]\n"
     << "dir = " << c.output_dir << '\n';
  os.precision(old);
}

GaussianMixture three_gaussian_target() {
  GaussianMixture g;
  g.centers = {{0.25, 0.3}, {0.75, 0.3}, {0.5, 0.75}};
  g.widths = {0.1, 0.1, 0.1};
  g.weights = {1.0, 1.0, 1.0};
  return g;
}

ControlProblem Setup::problem() const {
  ControlProblem p;
  p.ops = &ops;
  p.initial = initial;
  p.target = target;
  p.alpha = config.alpha;
  p.u_max = config.u_max;
  p.solver.kind = config.linear_solver;
  p.solver.rel_tol = config.solver_tol;
  return p;
}

ControlTrajectory Setup::zero_control() const {
  return ControlTrajectory(config.n_steps(), basis.size(), config.dt);
}

Setup build_setup(const ProblemConfig& cfg) {
  validate(cfg);
  Setup s;
  s.config = cfg;
  s.mesh = build_structured_mesh(cfg.nx, cfg.ny);
  s.basis = cfg.basis == BasisKind::gaussian ? ControlBasis::gaussian(cfg.n_basis, cfg.rbf_width)
                                             : ControlBasis::constant();
  s.model = ActuatorModel{cfg.decay, cfg.u_max};
  s.ops = assemble_operators(s.mesh, s.basis, s.model, {cfg.mu, cfg.quad_order});
  s.initial = project_density(s.mesh, s.ops.M, density_function(cfg.initial));
  s.target = project_density(s.mesh, s.ops.M, density_function(cfg.target));
  return s;
}

}  // namespace swarm
