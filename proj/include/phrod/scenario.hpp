#ifndef PHROD_SCENARIO_HPP
#define PHROD_SCENARIO_HPP

#include <array>
#include <string>
#include <vector>

#include "phrod/loads.hpp"
#include "phrod/material.hpp"
#include "phrod/types.hpp"

namespace phrod {

// Straight stress-free reference between two points; the frame convention is
// d3 along the axis with d1, d2 completed by the minimal rotation from e3.
struct RodGeometry {
  double length = 1.0;
  Vec3 start = Vec3::Zero();
  Vec3 end = Vec3::UnitZ();

  Vec3 axis() const { return (end - start).normalized(); }
  void validate() const;
};

struct SolverSettings {
  double h = 1e-2;
  double t_end = 1.0;
  double eps_newton = 1e-10;
  int max_newton_iters = 25;
  enum class JacobianMode { analytic, finite_difference };
  JacobianMode jacobian_mode = JacobianMode::analytic;
  double fd_step = 1e-7;  // relative step for the finite-difference mode

  void validate() const;
  int n_steps() const;  // round(t_end / h); throws if t_end is not a multiple of h
};

// Per-node clamp masks. Prescribed values are the initial configuration
// (constant in time) with implied zero velocities; multiplier unknowns at
// fully clamped director nodes are removed.
struct NodeClamp {
  int node = 0;
  std::array<bool, 3> position{true, true, true};
  std::array<bool, 9> frame{true, true, true, true, true, true, true, true, true};

  bool clamps_all_frame() const;
};

struct DirichletSpec {
  std::vector<NodeClamp> clamps;
};

struct Actuator {
  enum class Kind { pneumatic, tendon };
  Kind kind = Kind::pneumatic;
  double offset1 = 0.0;  // material offsets of the actuation line of centroids
  double offset2 = 0.0;
  TimeSignal magnitude;  // tau_k(t); <= 0 for pneumatic, >= 0 for tendon
};

struct OutputSpec {
  int probe_node = -1;  // -1: free end (last unclamped end node)
  int mid_node = -1;    // -1: node closest to L/2
  bool analytic_center_of_mass = false;  // adds deviation columns (free-flight benchmark)
};

struct Scenario {
  std::string name;
  RodGeometry geometry;
  MaterialModel material;
  std::vector<MaxwellBranch> maxwell;
  int n_elements = 1;
  int order = 2;
  DirichletSpec dirichlet;
  std::vector<LoadTerm> force_start, moment_start;  // applied at s = 0
  std::vector<LoadTerm> force_end, moment_end;      // applied at s = L
  std::vector<LoadTerm> distributed_force, distributed_moment;  // uniform in s
  std::vector<Actuator> actuators;
  SolverSettings solver;
  OutputSpec output;

  void validate() const;
  bool has_viscous() const { return !maxwell.empty(); }
  bool has_actuation() const { return !actuators.empty(); }
  bool has_end_load(bool at_end) const;
};

// Boundary/distributed load sample at one time instant.
struct LoadSample {
  Vec3 force_start = Vec3::Zero();
  Vec3 moment_start = Vec3::Zero();
  Vec3 force_end = Vec3::Zero();
  Vec3 moment_end = Vec3::Zero();
  Vec3 distributed_force = Vec3::Zero();
  Vec3 distributed_moment = Vec3::Zero();
  std::vector<double> tau;
};

LoadSample eval_loads(const Scenario& scenario, double t);

// Built-in benchmark scenarios.
std::vector<std::string> builtin_scenario_names();
bool is_builtin_scenario(const std::string& name);
Scenario builtin_scenario(const std::string& name);

// Scenario file round trip (sections [rod], [material], [maxwell.N], [mesh],
// [dirichlet], [loads], [actuators.N], [solver], [output]).
Scenario read_scenario_file(const std::string& path);
Scenario parse_scenario(const std::string& text, const std::string& fallback_name);
std::string serialize_scenario(const Scenario& scenario);
void write_scenario_file(const Scenario& scenario, const std::string& path);

// Applies "key=value" overrides (h, t_end, eps, n_e, p, max_newton_iters,
// jacobian_mode, fd_step).
void apply_override(Scenario& scenario, const std::string& key, const std::string& value);

// Analytic center of mass of the free-flight benchmark.
Vec3 flying_spaghetti_center_of_mass(double t);

}  // namespace phrod

#endif
