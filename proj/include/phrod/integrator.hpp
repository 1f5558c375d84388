#ifndef PHROD_INTEGRATOR_HPP
#define PHROD_INTEGRATOR_HPP

#include "phrod/system.hpp"

namespace phrod {

struct StepStats {
  int iterations = 0;
  double residual_norm = 0.0;
  double external_work = 0.0;  // h y_mid . u_mid
  double dissipation = 0.0;    // h z_mid . R z_mid, >= 0
};

// Implicit midpoint rule on the port-Hamiltonian DAE. State-dependent blocks
// are re-assembled at the midpoint state in every Newton iteration; clamped
// rows are replaced by (x - prescribed) so the Jacobian stays the exact
// derivative of the residual.
class MidpointIntegrator {
public:
  MidpointIntegrator(const RodSystem& system, SolverSettings settings);

  const SolverSettings& settings() const { return settings_; }

  // Consistent state at t = 0: straight geometry, orthonormal nodal frames,
  // stresses from the L2 projection of the displacement strains.
  GlobalState initialize() const;

  // Same projection applied to an arbitrary nodal configuration.
  GlobalState initialize_from(const VecX& qhat) const;

  VecX residual(const VecX& x_next, const VecX& x_prev, double t_prev) const;

  SpMat jacobian(const VecX& x_next, const VecX& x_prev, double t_prev) const;
  SpMat analytic_jacobian(const VecX& x_next, const VecX& x_prev, double t_prev) const;
  SpMat fd_jacobian(const VecX& x_next, const VecX& x_prev, double t_prev) const;

  GlobalState step(const GlobalState& prev, StepStats* stats = nullptr) const;

private:
  VecX assemble_residual(const VecX& x_next, const VecX& x_prev, double t_prev,
                         bool apply_dirichlet) const;

  const RodSystem& sys_;
  SolverSettings settings_;
};

}  // namespace phrod

#endif
