#ifndef PHROD_DIAGNOSTICS_HPP
#define PHROD_DIAGNOSTICS_HPP

#include <vector>

#include "phrod/integrator.hpp"
#include "phrod/system.hpp"

namespace phrod {

// Per-step observables; one record per accepted state including t = 0.
struct StepRecord {
  double t = 0.0;
  double energy = 0.0;
  double external_work = 0.0;    // increment over the step ending here
  double energy_increment = 0.0; // H_n - H_{n-1}
  double dissipation = 0.0;      // increment, >= 0 for viscous runs
  double power_balance = 0.0;    // dH - W_ext + D
  Vec3 linear_momentum = Vec3::Zero();
  Vec3 angular_momentum = Vec3::Zero();
  Vec3 center_of_mass = Vec3::Zero();
  Vec3 probe_position = Vec3::Zero();
  Vec3 probe_velocity = Vec3::Zero();
  Vec3 probe_velocity_body = Vec3::Zero();
  double constraint_max = 0.0;   // max over nodes of |g|_inf
  Vec6 mid_constraint = Vec6::Zero();
  Vec3 strain_norm_gamma = Vec3::Zero();  // |Gamma_i - Gamma0_i|_L2
  Vec3 strain_drift_kappa = Vec3::Zero(); // |(C_M M + K0)_j - K_j(q)|_L2
  int newton_iterations = 0;
  std::vector<double> tau;  // actuator magnitudes at t
};

double energy(const GlobalState& state, const RodSystem& sys);

struct Momenta {
  Vec3 linear;
  Vec3 angular;
};
Momenta momenta(const GlobalState& state, const RodSystem& sys);

Vec3 center_of_mass(const GlobalState& state, const RodSystem& sys);

// H(next) - H(prev) - W_ext + D for one accepted step.
double power_balance_violation(const GlobalState& prev, const GlobalState& next,
                               const RodSystem& sys, const StepStats& stats);

struct StrainNorms {
  Vec3 gamma;  // displacement-derived deviation from the reference strains
  Vec3 kappa;  // drift between stress-derived and displacement-derived curvature
};
StrainNorms strain_consistency(const GlobalState& state, const RodSystem& sys);

// Max over nodes of the orthonormality residual (infinity norm).
double constraint_violation(const GlobalState& state, const RodSystem& sys);

// Probe helpers; node indices resolved from the scenario output spec.
int resolve_probe_node(const RodSystem& sys);
int resolve_mid_node(const RodSystem& sys);

StepRecord make_record(const GlobalState& state, const RodSystem& sys,
                       const StepStats* stats, const StepRecord* previous);

}  // namespace phrod

#endif
