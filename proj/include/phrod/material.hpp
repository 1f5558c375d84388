#ifndef PHROD_MATERIAL_HPP
#define PHROD_MATERIAL_HPP

#include <optional>
#include <vector>

#include "phrod/types.hpp"

namespace phrod {

// A stiffness slot is either a finite positive value or rigid (the compliance
// entry is exactly zero and the DAE carries the kinematic constraint exactly).
struct Stiffness {
  double value = 0.0;
  bool rigid = false;

  static Stiffness finite(double k) { return {k, false}; }
  static Stiffness make_rigid() { return {0.0, true}; }
  double compliance() const { return rigid ? 0.0 : 1.0 / value; }
};

struct MaterialModel {
  double rhoA = 0.0;    // mass per unit length
  double Mrho11 = 0.0;  // rotary inertia densities
  double Mrho22 = 0.0;
  Stiffness kS1, kS2, kE;  // shear / extension  (force)
  Stiffness kB1, kB2, kT;  // bending / torsion  (force * length^2)

  void validate() const;

  // Diagonals of the compliance matrices; rigid slots map to zero.
  Vec3 compliance_gamma() const;  // C_N
  Vec3 compliance_kappa() const;  // C_M
  Vec3 stiffness_gamma() const;   // zero entries for rigid slots
  Vec3 stiffness_kappa() const;

  // 9x9 director mass density diag(Mrho11 I, Mrho22 I, 0).
  Mat99 director_inertia() const;
};

// One viscous Maxwell branch, specified as a fraction of the total stiffness
// so the per-slot sum condition holds by construction.
struct MaxwellBranch {
  double fraction = 0.0;  // in (0,1)
  double tauE = 0.0;      // relaxation time, dilatation/bending slots
  double tauG = 0.0;      // relaxation time, shear/torsion slots
};

// Stiffness partition of one branch (or of the long-term elastic branch).
struct BranchMatrices {
  Vec3 compliance_gamma;       // zero on rigid slots
  Vec3 compliance_kappa;
  Vec3 viscosity_gamma;        // V diag; zero for the elastic branch
  Vec3 viscosity_kappa;
  Vec3 inv_viscosity_gamma;    // V^{-1} diag; zero on rigid slots
  Vec3 inv_viscosity_kappa;
};

struct BranchSplit {
  BranchMatrices elastic;                 // long-term branch (no viscosity)
  std::vector<BranchMatrices> viscous;    // one entry per Maxwell branch
};

// Partitions the reference stiffnesses over the elastic branch and the
// Maxwell branches. Throws ConfigError unless the fractions sum below one
// with a positive elastic remainder.
BranchSplit branch_split(const MaterialModel& m, const std::vector<MaxwellBranch>& branches);

// Pointwise energy density 1/2 v^T M_o v + 1/2 sum_b sigma_b^T C_b sigma_b.
// `stresses` holds (N, M) per branch, elastic branch first.
double hamiltonian_density(const Vec12& v, const std::vector<Vec6>& stresses,
                           const MaterialModel& m, const BranchSplit& split);

}  // namespace phrod

#endif
