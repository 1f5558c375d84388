#include "phrod/diagnostics.hpp"

#include <cmath>

#include "phrod/kinematics.hpp"

namespace phrod {

double energy(const GlobalState& state, const RodSystem& sys) {
  const StateLayout& lay = sys.layout();
  const VecX v = state.x.segment(lay.v_offset(), lay.q_size());
  const int nn = lay.n_nodes;
  double h = 0.5 * sys.material().rhoA *
             v.segment(0, 3 * nn).dot(sys.mass_phi() * v.segment(0, 3 * nn));
  h += 0.5 * v.segment(3 * nn, 9 * nn).dot(sys.mass_dir() * v.segment(3 * nn, 9 * nn));
  for (int b = 0; b < lay.n_stress_blocks(); ++b) {
    const VecX s = state.x.segment(lay.stress_offset(b), lay.stress_size());
    h += 0.5 * s.dot(sys.compliance(b) * s);
  }
  return h;
}

Momenta momenta(const GlobalState& state, const RodSystem& sys) {
  const StateLayout& lay = sys.layout();
  const RodMesh& mesh = sys.mesh();
  const QuadratureRule quad = quadrature_rule();
  const double jac = mesh.jacobian();
  const double rhoA = sys.material().rhoA;
  const double m11 = sys.material().Mrho11;
  const double m22 = sys.material().Mrho22;

  Momenta out{Vec3::Zero(), Vec3::Zero()};
  for (int e = 0; e < mesh.n_elements(); ++e) {
    for (int gp = 0; gp < 3; ++gp) {
      const double w = quad.weights[static_cast<std::size_t>(gp)] * jac;
      const ShapeEval sh = shape_eval(mesh.order(), quad.points[static_cast<std::size_t>(gp)]);
      Vec3 phi = Vec3::Zero(), vphi = Vec3::Zero();
      Vec9 d = Vec9::Zero(), vd = Vec9::Zero();
      for (int i = 0; i < mesh.nodes_per_element(); ++i) {
        const int gi = mesh.element_node(e, i);
        const double n = sh.value[static_cast<std::size_t>(i)];
        phi += n * state.x.segment<3>(lay.phi_offset(gi));
        vphi += n * state.x.segment<3>(lay.vphi_offset(gi));
        d += n * state.x.segment<9>(lay.dir_offset(gi));
        vd += n * state.x.segment<9>(lay.vdir_offset(gi));
      }
      out.linear += w * rhoA * vphi;
      Vec3 rot = phi.cross(rhoA * vphi);
      rot += m11 * d.segment<3>(0).cross(vd.segment<3>(0));
      rot += m22 * d.segment<3>(3).cross(vd.segment<3>(3));
      out.angular += w * rot;
    }
  }
  return out;
}

Vec3 center_of_mass(const GlobalState& state, const RodSystem& sys) {
  const StateLayout& lay = sys.layout();
  const RodMesh& mesh = sys.mesh();
  const QuadratureRule quad = quadrature_rule();
  const double jac = mesh.jacobian();
  Vec3 r = Vec3::Zero();
  for (int e = 0; e < mesh.n_elements(); ++e)
    for (int gp = 0; gp < 3; ++gp) {
      const double w = quad.weights[static_cast<std::size_t>(gp)] * jac;
      const ShapeEval sh = shape_eval(mesh.order(), quad.points[static_cast<std::size_t>(gp)]);
      for (int i = 0; i < mesh.nodes_per_element(); ++i)
        r += w * sh.value[static_cast<std::size_t>(i)] *
             state.x.segment<3>(lay.phi_offset(mesh.element_node(e, i)));
    }
  return r / mesh.length();
}

double power_balance_violation(const GlobalState& prev, const GlobalState& next,
                               const RodSystem& sys, const StepStats& stats) {
  return energy(next, sys) - energy(prev, sys) - stats.external_work + stats.dissipation;
}

StrainNorms strain_consistency(const GlobalState& state, const RodSystem& sys) {
  const StateLayout& lay = sys.layout();
  const RodMesh& mesh = sys.mesh();
  const QuadratureRule quad = quadrature_rule();
  const double jac = mesh.jacobian();
  const Vec3 gamma0(0.0, 0.0, 1.0);
  const Vec3 c_kappa = sys.branches().elastic.compliance_kappa;

  Vec3 acc_gamma = Vec3::Zero(), acc_kappa = Vec3::Zero();
  const VecX q = state.x.segment(lay.q_offset(), lay.q_size());
  for (int e = 0; e < mesh.n_elements(); ++e) {
    for (int gp = 0; gp < 3; ++gp) {
      const double w = quad.weights[static_cast<std::size_t>(gp)] * jac;
      const StressShapeEval ps =
          stress_shape_eval(mesh.order() - 1, quad.points[static_cast<std::size_t>(gp)]);
      const RodSystem::GaussPointState st = sys.eval_gauss(q, e, gp);
      const StrainPair sp = strain_measures(st.d, st.d_s, st.phi_s);

      // Stress-derived curvature from the long-term elastic branch.
      Vec3 m_gp = Vec3::Zero();
      for (int a = 0; a < mesh.stress_nodes_per_element(); ++a)
        m_gp += ps.value[static_cast<std::size_t>(a)] *
                state.x.segment<3>(lay.moment_offset(0, mesh.element_stress_node(e, a)));
      const Vec3 kappa_stress = c_kappa.asDiagonal() * m_gp;  // K0 = 0

      const Vec3 dg = sp.gamma - gamma0;
      const Vec3 dk = kappa_stress - sp.kappa;
      acc_gamma += w * dg.cwiseProduct(dg);
      acc_kappa += w * dk.cwiseProduct(dk);
    }
  }
  return {acc_gamma.cwiseSqrt(), acc_kappa.cwiseSqrt()};
}

double constraint_violation(const GlobalState& state, const RodSystem& sys) {
  const StateLayout& lay = sys.layout();
  double worst = 0.0;
  for (int i = 0; i < lay.n_nodes; ++i) {
    const Vec6 g = orthonormality_residual(state.x.segment<9>(lay.dir_offset(i)));
    worst = std::max(worst, g.cwiseAbs().maxCoeff());
  }
  return worst;
}

int resolve_probe_node(const RodSystem& sys) {
  const int configured = sys.scenario().output.probe_node;
  if (configured >= 0) return configured;
  // Default: the free end; prefer s = L unless it is clamped.
  const int last = sys.layout().n_nodes - 1;
  const bool last_clamped = sys.is_clamped(sys.layout().phi_offset(last));
  return last_clamped ? 0 : last;
}

int resolve_mid_node(const RodSystem& sys) {
  const int configured = sys.scenario().output.mid_node;
  if (configured >= 0) return configured;
  return (sys.layout().n_nodes - 1) / 2;
}

StepRecord make_record(const GlobalState& state, const RodSystem& sys,
                       const StepStats* stats, const StepRecord* previous) {
  const StateLayout& lay = sys.layout();
  StepRecord r;
  r.t = state.t;
  r.energy = energy(state, sys);
  if (stats != nullptr) {
    r.external_work = stats->external_work;
    r.dissipation = stats->dissipation;
    r.newton_iterations = stats->iterations;
  }
  if (previous != nullptr) {
    r.energy_increment = r.energy - previous->energy;
    r.power_balance = r.energy_increment - r.external_work + r.dissipation;
  }
  const Momenta p = momenta(state, sys);
  r.linear_momentum = p.linear;
  r.angular_momentum = p.angular;
  r.center_of_mass = center_of_mass(state, sys);

  const int probe = resolve_probe_node(sys);
  const int mid = resolve_mid_node(sys);
  r.probe_position = state.x.segment<3>(lay.phi_offset(probe));
  r.probe_velocity = state.x.segment<3>(lay.vphi_offset(probe));
  r.probe_velocity_body =
      rotation_matrix(state.x.segment<9>(lay.dir_offset(probe))).transpose() * r.probe_velocity;
  r.constraint_max = constraint_violation(state, sys);
  r.mid_constraint = orthonormality_residual(state.x.segment<9>(lay.dir_offset(mid)));

  const StrainNorms norms = strain_consistency(state, sys);
  r.strain_norm_gamma = norms.gamma;
  r.strain_drift_kappa = norms.kappa;

  if (!sys.scenario().actuators.empty()) r.tau = eval_loads(sys.scenario(), state.t).tau;
  return r;
}

}  // namespace phrod
