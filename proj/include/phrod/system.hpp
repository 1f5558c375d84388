#ifndef PHROD_SYSTEM_HPP
#define PHROD_SYSTEM_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "phrod/mesh.hpp"
#include "phrod/scenario.hpp"
#include "phrod/state.hpp"

namespace phrod {

// State-dependent blocks of the structure matrix. All three are linear in
// the configuration vector they were assembled from, so the same routine
// evaluated at a velocity yields the configuration gradient of the stress
// rates.
struct StructureBlocks {
  SpMat g_phiN;  // (3 ns) x (3 nn):  stress-rate coupling to centerline velocities
  SpMat g_dN;    // (3 ns) x (9 nn):  shear coupling to director velocities
  SpMat g_dM;    // (3 ns) x (9 nn):  curvature coupling to director velocities
};

// Assembled problem: mesh, material, boundary conditions, loads and ports of
// one scenario. Immutable once constructed; all assembly methods are const
// and produce fresh sparse matrices.
class RodSystem {
public:
  explicit RodSystem(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }
  const RodMesh& mesh() const { return mesh_; }
  const StateLayout& layout() const { return layout_; }
  const MaterialModel& material() const { return scenario_.material; }
  const BranchSplit& branches() const { return split_; }

  // ---- constant matrices -------------------------------------------------
  const SpMat& mass_phi() const { return mass_phi_; }  // (3nn)^2, no rhoA factor
  const SpMat& mass_dir() const { return mass_dir_; }  // (9nn)^2, weighted by M_rho
  // block = 0 is the elastic branch.
  const SpMat& compliance(int block) const { return compliance_[static_cast<std::size_t>(block)]; }
  // branch = 1..m viscous branches (matching stress block indices).
  const SpMat& dissipation(int branch) const { return dissipation_[static_cast<std::size_t>(branch) - 1]; }

  SpMat descriptor() const;          // E = diag(I, M_o, C_0.., 0)
  SpMat dissipation_matrix() const;  // R on the full state space
  VecX costate(const VecX& x) const; // z = Q x (zero configuration block)

  // ---- state-dependent blocks ---------------------------------------------
  StructureBlocks structure(const VecX& qlike) const;
  SpMat constraint(const VecX& qlike) const;    // node-wise gradient blocks, (6nn) x (9nn)
  SpMat moment_port(const VecX& qlike) const;   // (9nn) x (3nn) distributed moment port
  SpMat structure_matrix(const VecX& qhat) const;  // full skew J on the state space

  // Gradient of the internal force J_sv(q)^T sigma + G(q)^T lambda with
  // respect to q, holding the stress/multiplier weights fixed. N/M are the
  // summed stress vectors over all branches.
  SpMat internal_force_qgrad(const VecX& n_total, const VecX& m_total, const VecX& lambda) const;

  // ---- loads and ports -----------------------------------------------------
  // Force on the velocity rows (length 12nn) from boundary loads, distributed
  // fields and actuation, evaluated at configuration qhat and time t.
  VecX external_force(const VecX& qhat, double t) const;
  SpMat external_force_qgrad(const VecX& qhat, double t) const;

  // Quadrature reduction of arbitrary distributed fields (tests use this).
  VecX distributed_force(const VecX& qhat, const std::function<Vec3(double)>& nbar,
                         const std::function<Vec3(double)>& mbar) const;

  // Actuation port columns B_u(q) (12nn x n_actuators) and their contraction.
  MatX actuation_columns(const VecX& qhat) const;
  VecX actuation_force(const VecX& qhat, const std::vector<double>& tau) const;
  SpMat actuation_force_qgrad(const VecX& qhat, const std::vector<double>& tau) const;

  // Boundary velocity outputs (v_phi, omega) at both ends.
  struct BoundaryVelocity {
    Vec3 v_start, w_start, v_end, w_end;
  };
  BoundaryVelocity boundary_velocity(const VecX& qhat, const VecX& vhat) const;

  // ---- Dirichlet bookkeeping -----------------------------------------------
  const std::vector<std::uint8_t>& clamped() const { return clamped_; }
  const VecX& prescribed() const { return prescribed_; }
  bool is_clamped(int dof) const { return clamped_[static_cast<std::size_t>(dof)] != 0; }

  // Reference configuration (nodal straight-line geometry with axis-aligned
  // frames); also the source of prescribed boundary values.
  const VecX& reference_q() const { return reference_q_; }

  // Field evaluation helpers at a Gauss point (element, gp) of a q-like vector.
  struct GaussPointState {
    Vec3 phi_s;
    Vec9 d;
    Vec9 d_s;
  };
  GaussPointState eval_gauss(const VecX& qlike, int element, int gp) const;

private:
  void build_constant_matrices();
  void build_dirichlet();

  Scenario scenario_;
  RodMesh mesh_;
  StateLayout layout_;
  BranchSplit split_;

  SpMat mass_phi_;
  SpMat mass_dir_;
  std::vector<SpMat> compliance_;
  std::vector<SpMat> dissipation_;

  std::vector<std::uint8_t> clamped_;
  VecX prescribed_;
  VecX reference_q_;
};

}  // namespace phrod

#endif
