#include "swarm/io.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace swarm {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  return os;
}

}  // namespace

void write_snapshots(const std::filesystem::path& dir, const std::string& prefix,
                     const Mesh& mesh, const std::vector<Vector>& fields, double dt,
                     int first_index) {
  std::filesystem::create_directories(dir);
  auto manifest = open_out(dir / (prefix + "_manifest.csv"));
  manifest << "index,t,file\n";
  manifest.precision(12);
  for (std::size_t s = 0; s < fields.size(); ++s) {
    const int index = first_index + static_cast<int>(s);
    std::ostringstream name;
    name << prefix << '_' << std::setw(4) << std::setfill('0') << index << ".csv";
    auto os = open_out(dir / name.str());
    os << "node,x,y,value\n";
    os.precision(17);
    for (std::size_t n = 0; n < mesh.n_nodes(); ++n) {
      os << n << ',' << mesh.nodes[n].x << ',' << mesh.nodes[n].y << ','
         << fields[s][static_cast<Eigen::Index>(n)] << '\n';
    }
    manifest << index << ',' << index * dt << ',' << name.str() << '\n';
  }
}

void write_vtk(const Mesh& mesh, const Vector& nodal, const std::string& name,
               std::ostream& os) {
  os << "# vtk DataFile Version 3.0\n" << name << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os.precision(17);
  os << "POINTS " << mesh.n_nodes() << " double\n";
  for (const Point& p : mesh.nodes) os << p.x << ' ' << p.y << " 0\n";
  os << "CELLS " << mesh.n_triangles() << ' ' << 4 * mesh.n_triangles() << '\n';
  for (const auto& t : mesh.triangles) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "CELL_TYPES " << mesh.n_triangles() << '\n';
  for (std::size_t t = 0; t < mesh.n_triangles(); ++t) os << "5\n";
  os << "POINT_DATA " << mesh.n_nodes() << "\nSCALARS " << name
     << " double 1\nLOOKUP_TABLE default\n";
  for (Eigen::Index i = 0; i < nodal.size(); ++i) os << nodal[i] << '\n';
}

void write_control_csv(const ControlTrajectory& ctrl, std::ostream& os) {
  os << "i,a,k,value\n";
  os.precision(17);
  for (int i = 0; i <= ctrl.n_steps(); ++i) {
    for (Side side : kAllSides) {
      for (int k = 0; k < ctrl.n_basis(); ++k) {
        os << i << ',' << static_cast<int>(side) << ',' << k + 1 << ','
           << ctrl.at(i, side, k) << '\n';
      }
    }
  }
}

void write_control_profiles_csv(const ControlTrajectory& ctrl, const ControlBasis& basis,
                                int samples, std::ostream& os) {
  os << "i,t,side,s,u\n";
  os.precision(12);
  for (int i = 0; i <= ctrl.n_steps(); ++i) {
    for (Side side : kAllSides) {
      for (int j = 0; j < samples; ++j) {
        const double s = samples > 1 ? static_cast<double>(j) / (samples - 1) : 0.5;
        os << i << ',' << i * ctrl.dt() << ',' << static_cast<int>(side) << ',' << s << ','
           << side_intensity(ctrl.instant(i), basis, side, s) << '\n';
      }
    }
  }
}

ControlTrajectory read_control_csv(std::istream& is, int n_steps, int n_basis, double dt) {
  ControlTrajectory ctrl(n_steps, n_basis, dt);
  std::string line;
  std::getline(is, line);  // header
  std::size_t count = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int i = 0, a = 0, k = 0;
    double v = 0.0;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(ls >> i >> c1 >> a >> c2 >> k >> c3 >> v) || c1 != ',' || c2 != ',' || c3 != ',') {
      throw std::runtime_error("control csv: malformed line '" + line + "'");
    }
    if (i < 0 || i > n_steps || a < 1 || a > 4 || k < 1 || k > n_basis) {
      throw std::runtime_error("control csv: index out of range in '" + line + "'");
    }
    ctrl.at(i, static_cast<Side>(a), k - 1) = v;
    ++count;
  }
  if (count != ctrl.flat_size()) {
    throw std::runtime_error("control csv: expected " + std::to_string(ctrl.flat_size()) +
                             " rows, read " + std::to_string(count));
  }
  return ctrl;
}

void write_history_csv(const std::vector<IterationRecord>& history, std::ostream& os) {
  os << "iter,cost,terminal,control,pg_norm,step\n";
  os.precision(17);
  for (const auto& r : history) {
    os << r.iter << ',' << r.cost << ',' << r.terminal << ',' << r.control << ','
       << r.pg_norm << ',' << r.step << '\n';
  }
}

void write_particles_csv(const ParticleEnsemble& ensemble, std::ostream& os) {
  os << "particle,x,y\n";
  os.precision(17);
  for (std::size_t i = 0; i < ensemble.positions.size(); ++i) {
    os << i << ',' << ensemble.positions[i].x << ',' << ensemble.positions[i].y << '\n';
  }
}

void write_binned_csv(const BinnedDensity& d, std::ostream& os) {
  os << "i,j,x_lo,y_lo,density\n";
  os.precision(17);
  for (int j = 0; j < d.bins; ++j) {
    for (int i = 0; i < d.bins; ++i) {
      os << i << ',' << j << ',' << static_cast<double>(i) / d.bins << ','
         << static_cast<double>(j) / d.bins << ','
         << d.values[static_cast<std::size_t>(j) * d.bins + i] << '\n';
    }
  }
}

void Manifest::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void Manifest::set(const std::string& key, double value) {
  std::ostringstream os;
  os.precision(17);
  os << value;
  set(key, os.str());
}

void Manifest::write(std::ostream& os) const {
  for (const auto& [k, v] : entries_) os << k << ": " << v << '\n';
}

}  // namespace swarm
