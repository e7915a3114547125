#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "swarm/diagnostics.hpp"
#include "swarm/particles.hpp"

namespace swarm {

/// One CSV per snapshot ("node,x,y,value") named <prefix>_<i>.csv, plus
/// <prefix>_manifest.csv listing "index,t,file". Snapshot i sits at time
/// (first_index + i) * dt.
void write_snapshots(const std::filesystem::path& dir, const std::string& prefix,
                     const Mesh& mesh, const std::vector<Vector>& fields, double dt,
                     int first_index = 0);

/// Legacy ASCII VTK unstructured grid with one point-data scalar.
void write_vtk(const Mesh& mesh, const Vector& nodal, const std::string& name,
               std::ostream& os);

/// "i,a,k,value".
void write_control_csv(const ControlTrajectory& ctrl, std::ostream& os);

/// "i,t,side,s,u": u_a(s, t_i) reconstructed on `samples` points per side.
void write_control_profiles_csv(const ControlTrajectory& ctrl, const ControlBasis& basis,
                                int samples, std::ostream& os);

/// Reads a control written by write_control_csv into a trajectory of the given shape.
ControlTrajectory read_control_csv(std::istream& is, int n_steps, int n_basis, double dt);

/// "iter,cost,terminal,control,pg_norm,step".
void write_history_csv(const std::vector<IterationRecord>& history, std::ostream& os);

/// "particle,x,y".
void write_particles_csv(const ParticleEnsemble& ensemble, std::ostream& os);

/// "i,j,x_lo,y_lo,density".
void write_binned_csv(const BinnedDensity& d, std::ostream& os);

/// "key: value" lines in insertion order.
class Manifest {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void write(std::ostream& os) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace swarm
