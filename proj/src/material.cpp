#include "phrod/material.hpp"

#include <cmath>

#include "phrod/kinematics.hpp"

namespace phrod {

namespace {

void check_slot(const Stiffness& k, const char* name) {
  if (!k.rigid && !(k.value > 0.0))
    throw ConfigError(std::string("stiffness ") + name + " must be positive or rigid");
}

}  // namespace

void MaterialModel::validate() const {
  if (rhoA < 0.0 || Mrho11 < 0.0 || Mrho22 < 0.0)
    throw ConfigError("inertia densities must be non-negative");
  check_slot(kS1, "kS1");
  check_slot(kS2, "kS2");
  check_slot(kE, "kE");
  check_slot(kB1, "kB1");
  check_slot(kB2, "kB2");
  check_slot(kT, "kT");
}

Vec3 MaterialModel::compliance_gamma() const {
  return Vec3(kS1.compliance(), kS2.compliance(), kE.compliance());
}

Vec3 MaterialModel::compliance_kappa() const {
  return Vec3(kB1.compliance(), kB2.compliance(), kT.compliance());
}

Vec3 MaterialModel::stiffness_gamma() const {
  return Vec3(kS1.rigid ? 0.0 : kS1.value, kS2.rigid ? 0.0 : kS2.value,
              kE.rigid ? 0.0 : kE.value);
}

Vec3 MaterialModel::stiffness_kappa() const {
  return Vec3(kB1.rigid ? 0.0 : kB1.value, kB2.rigid ? 0.0 : kB2.value,
              kT.rigid ? 0.0 : kT.value);
}

Mat99 MaterialModel::director_inertia() const {
  Mat99 m = Mat99::Zero();
  m.block<3, 3>(0, 0) = Mrho11 * Mat3::Identity();
  m.block<3, 3>(3, 3) = Mrho22 * Mat3::Identity();
  return m;
}

namespace {

// Per-slot data for one branch of fraction f. Rigid slots keep zero
// compliance and zero inverse viscosity (no viscous flow on locked modes).
BranchMatrices make_branch(const MaterialModel& m, double f, double tauE, double tauG,
                           bool viscous) {
  BranchMatrices b;
  const Stiffness* gam[3] = {&m.kS1, &m.kS2, &m.kE};
  const Stiffness* kap[3] = {&m.kB1, &m.kB2, &m.kT};
  const double tau_gamma[3] = {tauG, tauG, tauE};  // shear, shear, dilatation
  const double tau_kappa[3] = {tauE, tauE, tauG};  // bending, bending, torsion
  for (int i = 0; i < 3; ++i) {
    const bool rg = gam[i]->rigid;
    const bool rk = kap[i]->rigid;
    const double kg = rg ? 0.0 : f * gam[i]->value;
    const double kk = rk ? 0.0 : f * kap[i]->value;
    b.compliance_gamma(i) = rg ? 0.0 : 1.0 / kg;
    b.compliance_kappa(i) = rk ? 0.0 : 1.0 / kk;
    if (viscous) {
      b.viscosity_gamma(i) = tau_gamma[i] * kg;
      b.viscosity_kappa(i) = tau_kappa[i] * kk;
      b.inv_viscosity_gamma(i) = rg ? 0.0 : 1.0 / (tau_gamma[i] * kg);
      b.inv_viscosity_kappa(i) = rk ? 0.0 : 1.0 / (tau_kappa[i] * kk);
    } else {
      b.viscosity_gamma(i) = 0.0;
      b.viscosity_kappa(i) = 0.0;
      b.inv_viscosity_gamma(i) = 0.0;
      b.inv_viscosity_kappa(i) = 0.0;
    }
  }
  return b;
}

}  // namespace

BranchSplit branch_split(const MaterialModel& m, const std::vector<MaxwellBranch>& branches) {
  double sum = 0.0;
  for (const auto& br : branches) {
    if (!(br.fraction > 0.0 && br.fraction <= 1.0))
      throw ConfigError("Maxwell branch fraction must lie in (0, 1]");
    if (!(br.tauE > 0.0) || !(br.tauG > 0.0))
      throw ConfigError("Maxwell relaxation times must be positive");
    sum += br.fraction;
  }
  const double elastic_fraction = 1.0 - sum;
  if (elastic_fraction <= 1e-12)
    throw ConfigError("Maxwell branch fractions must leave a positive elastic remainder");

  BranchSplit split;
  split.elastic = make_branch(m, elastic_fraction, 0.0, 0.0, false);
  for (const auto& br : branches)
    split.viscous.push_back(make_branch(m, br.fraction, br.tauE, br.tauG, true));
  return split;
}

double hamiltonian_density(const Vec12& v, const std::vector<Vec6>& stresses,
                           const MaterialModel& m, const BranchSplit& split) {
  const Vec3 vphi = v.segment<3>(0);
  const Vec9 vd = v.segment<9>(3);
  double h = 0.5 * m.rhoA * vphi.squaredNorm() + 0.5 * vd.dot(m.director_inertia() * vd);
  if (stresses.size() != split.viscous.size() + 1)
    throw ConfigError("stress block count does not match configured branches");
  for (std::size_t b = 0; b < stresses.size(); ++b) {
    const BranchMatrices& bm = (b == 0) ? split.elastic : split.viscous[b - 1];
    const Vec3 n = stresses[b].segment<3>(0);
    const Vec3 mm = stresses[b].segment<3>(3);
    h += 0.5 * n.dot(bm.compliance_gamma.asDiagonal() * n);
    h += 0.5 * mm.dot(bm.compliance_kappa.asDiagonal() * mm);
  }
  return h;
}

}  // namespace phrod
