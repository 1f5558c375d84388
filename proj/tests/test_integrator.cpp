#include "phrod/integrator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "phrod/diagnostics.hpp"
#include "phrod/kinematics.hpp"

using namespace phrod;

namespace {

std::mt19937 rng(91);

double urand(double lo = -1.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec9 random_frame() {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  const Mat3 r = q.toRotationMatrix();
  Vec9 d;
  d.segment<3>(0) = r.col(0);
  d.segment<3>(3) = r.col(1);
  d.segment<3>(6) = r.col(2);
  return d;
}

Scenario free_rod(int n_e = 2) {
  Scenario sc;
  sc.name = "test_rod";
  sc.geometry = {2.0, Vec3::Zero(), Vec3(0.0, 0.0, 2.0)};
  sc.material.rhoA = 1.3;
  sc.material.Mrho11 = 0.7;
  sc.material.Mrho22 = 0.9;
  sc.material.kS1 = sc.material.kS2 = Stiffness::finite(50.0);
  sc.material.kE = Stiffness::finite(80.0);
  sc.material.kB1 = sc.material.kB2 = Stiffness::finite(4.0);
  sc.material.kT = Stiffness::finite(2.0);
  sc.n_elements = n_e;
  sc.order = 2;
  sc.solver.h = 0.05;
  sc.solver.t_end = 0.5;
  sc.solver.eps_newton = 1e-12;
  return sc;
}

GlobalState random_state(const RodSystem& sys, double amplitude = 0.5) {
  const StateLayout& lay = sys.layout();
  GlobalState st;
  st.x = VecX::Zero(lay.dim());
  for (int i = 0; i < lay.n_nodes; ++i) {
    st.x.segment<3>(lay.phi_offset(i)) =
        sys.reference_q().segment<3>(lay.phi_offset(i)) +
        amplitude * Vec3(urand(), urand(), urand());
    st.x.segment<9>(lay.dir_offset(i)) = random_frame();
  }
  for (int i = lay.v_offset(); i < lay.v_offset() + lay.q_size(); ++i)
    st.x[i] = amplitude * urand();
  for (int b = 0; b < lay.n_stress_blocks(); ++b)
    for (int i = 0; i < lay.stress_size(); ++i)
      st.x[lay.stress_offset(b) + i] = amplitude * urand();
  for (int i = lay.lambda_offset(); i < lay.lambda_offset() + lay.lambda_size(); ++i)
    st.x[i] = amplitude * urand();
  for (int i = 0; i < lay.dim(); ++i)
    if (sys.is_clamped(i)) st.x[i] = sys.prescribed()[i];
  return st;
}

}  // namespace

TEST(Residual, EquilibriumAtRestIsZero) {
  const RodSystem sys(free_rod());
  const MidpointIntegrator integrator(sys, sys.scenario().solver);
  const GlobalState x0 = integrator.initialize();
  EXPECT_LT(integrator.residual(x0.x, x0.x, 0.0).norm(), 1e-14);
}

TEST(Residual, RigidTranslationIsExactFreeFlight) {
  const RodSystem sys(free_rod());
  const StateLayout& lay = sys.layout();
  const MidpointIntegrator integrator(sys, sys.scenario().solver);
  GlobalState prev = integrator.initialize();
  const Vec3 c(0.3, -0.2, 0.9);
  for (int i = 0; i < lay.n_nodes; ++i)
    prev.x.segment<3>(lay.vphi_offset(i)) = c;
  VecX next = prev.x;
  const double h = sys.scenario().solver.h;
  for (int i = 0; i < lay.n_nodes; ++i)
    next.segment<3>(lay.phi_offset(i)) += h * c;
  EXPECT_LT(integrator.residual(next, prev.x, 0.0).norm(), 1e-13);
}

TEST(Residual, FreeFlightLoadPulseMagnitude) {
  const Scenario sc = builtin_scenario("flying_spaghetti");
  const RodSystem sys(sc);
  const VecX f = sys.external_force(sys.reference_q(), 2.5);
  const int last = sys.layout().n_nodes - 1;
  // f(2.5) = 200 scaled by the force direction (1/10, 0, 0).
  EXPECT_LT((f.segment<3>(sys.layout().phi_offset(last)) - Vec3(20.0, 0.0, 0.0)).norm(), 1e-12);
  const LoadSample loads = eval_loads(sc, 2.5);
  EXPECT_LT((loads.moment_end - Vec3(0.0, 200.0, 100.0)).norm(), 1e-12);
}

TEST(Jacobian, AnalyticMatchesFiniteDifferences) {
  Scenario sc = free_rod();
  sc.moment_end = {{Vec3(0.2, -0.1, 0.3), TimeSignal::constant(1.0)}};
  sc.force_end = {{Vec3(0.1, 0.4, -0.2), TimeSignal::constant(1.0)}};
  sc.distributed_moment = {{Vec3(0.05, 0.1, -0.03), TimeSignal::constant(1.0)}};
  sc.maxwell = {MaxwellBranch{0.5, 0.1, 0.15}};
  Actuator pneumatic;
  pneumatic.kind = Actuator::Kind::pneumatic;
  pneumatic.offset1 = 0.04;
  pneumatic.offset2 = -0.03;
  pneumatic.magnitude = TimeSignal::constant(-0.8);
  Actuator tendon;
  tendon.kind = Actuator::Kind::tendon;
  tendon.offset1 = -0.02;
  tendon.offset2 = 0.05;
  tendon.magnitude = TimeSignal::constant(0.6);
  sc.actuators = {pneumatic, tendon};

  const RodSystem sys(sc);
  const MidpointIntegrator integrator(sys, sc.solver);
  const GlobalState prev = random_state(sys, 0.3);
  GlobalState next = random_state(sys, 0.3);

  const MatX a = MatX(integrator.analytic_jacobian(next.x, prev.x, 0.1));
  const MatX f = MatX(integrator.fd_jacobian(next.x, prev.x, 0.1));
  const double scale = f.cwiseAbs().maxCoeff();
  EXPECT_LT((a - f).cwiseAbs().maxCoeff() / scale, 1e-5);
}

TEST(Jacobian, DirichletRowsAreIdentity) {
  Scenario sc = free_rod();
  sc.dirichlet.clamps = {NodeClamp{0}};
  const RodSystem sys(sc);
  const MidpointIntegrator integrator(sys, sc.solver);
  const GlobalState x0 = integrator.initialize();
  const MatX j = MatX(integrator.analytic_jacobian(x0.x, x0.x, 0.0));
  for (int i = 0; i < sys.layout().dim(); ++i) {
    if (!sys.is_clamped(i)) continue;
    for (int c = 0; c < sys.layout().dim(); ++c)
      EXPECT_EQ(j(i, c), i == c ? 1.0 : 0.0);
  }
}

TEST(Jacobian, QuasistaticSystemIsNonsingular) {
  const Scenario sc = builtin_scenario("quasistatic_cantilever");
  const RodSystem sys(sc);
  const MidpointIntegrator integrator(sys, sc.solver);
  const GlobalState x0 = integrator.initialize();
  const SpMat j = integrator.analytic_jacobian(x0.x, x0.x, 0.0);
  Eigen::SparseLU<SpMat> lu(j);
  ASSERT_EQ(lu.info(), Eigen::Success);
  const VecX rhs = VecX::Ones(sys.layout().dim());
  const VecX sol = lu.solve(rhs);
  EXPECT_TRUE(sol.allFinite());
}

TEST(Step, ClosedSystemConservesEnergyAndConstraints) {
  const Scenario sc = free_rod(3);
  const RodSystem sys(sc);
  const MidpointIntegrator integrator(sys, sc.solver);
  GlobalState state = integrator.initialize();
  // Rigid spin plus a compatible deformation velocity.
  const StateLayout& lay = sys.layout();
  const Vec3 omega(0.6, -0.3, 1.1);
  for (int i = 0; i < lay.n_nodes; ++i) {
    const Vec3 phi = state.x.segment<3>(lay.phi_offset(i));
    state.x.segment<3>(lay.vphi_offset(i)) = omega.cross(phi) + Vec3(0.2, 0.0, 0.1 * phi.z());
    for (int a = 0; a < 3; ++a)
      state.x.segment<3>(lay.vdir_offset(i) + 3 * a) =
          omega.cross(state.x.segment<3>(lay.dir_offset(i) + 3 * a));
  }
  double h_prev = energy(state, sys);
  const Momenta m0 = momenta(state, sys);
  for (int n = 0; n < 8; ++n) {
    StepStats stats;
    state = integrator.step(state, &stats);
    const double h_now = energy(state, sys);
    EXPECT_LT(std::abs(h_now - h_prev), 1e-11 * std::max(1.0, h_now));
    EXPECT_LT(constraint_violation(state, sys), 1e-12);
    h_prev = h_now;
  }
  const Momenta m1 = momenta(state, sys);
  EXPECT_LT((m1.linear - m0.linear).norm(), 1e-11);
  EXPECT_LT((m1.angular - m0.angular).norm(), 1e-10 * std::max(1.0, m0.angular.norm()));
}

TEST(Step, LoadedStepMatchesExternalWork) {
  Scenario sc = builtin_scenario("cantilever_oscillation");
  sc.solver.t_end = 0.01;
  const RodSystem sys(sc);
  const MidpointIntegrator integrator(sys, sc.solver);
  GlobalState state = integrator.initialize();
  double h_prev = energy(state, sys);
  for (int n = 0; n < 10; ++n) {
    StepStats stats;
    state = integrator.step(state, &stats);
    const double h_now = energy(state, sys);
    EXPECT_LT(std::abs(h_now - h_prev - stats.external_work), 1e-12 * std::max(1.0, h_now));
    h_prev = h_now;
  }
}

TEST(Step, ViscousStepBalancesWorkMinusDissipation) {
  Scenario sc = builtin_scenario("cantilever_oscillation_viscous");
  sc.solver.t_end = 0.01;
  const RodSystem sys(sc);
  const MidpointIntegrator integrator(sys, sc.solver);
  GlobalState state = integrator.initialize();
  double h_prev = energy(state, sys);
  for (int n = 0; n < 10; ++n) {
    StepStats stats;
    state = integrator.step(state, &stats);
    EXPECT_GE(stats.dissipation, 0.0);
    const double h_now = energy(state, sys);
    EXPECT_LT(std::abs(h_now - h_prev - stats.external_work + stats.dissipation),
              1e-13 * std::max(1.0, h_now));
    h_prev = h_now;
  }
}

TEST(Step, MomentumBalancesMatchLoads) {
  const Scenario sc = builtin_scenario("flying_spaghetti");
  const RodSystem sys(sc);
  const StateLayout& lay = sys.layout();
  const MidpointIntegrator integrator(sys, sc.solver);
  GlobalState state = integrator.initialize();
  const double h = sc.solver.h;
  for (int n = 0; n < 8; ++n) {
    const Momenta before = momenta(state, sys);
    const VecX x_prev = state.x;
    state = integrator.step(state);
    const Momenta after = momenta(state, sys);
    const double t_mid = (n + 0.5) * h;
    const LoadSample loads = eval_loads(sc, t_mid);
    // Linear momentum increment is exactly the impulse.
    EXPECT_LT((after.linear - before.linear - h * loads.force_end).norm(), 1e-10);
    // Angular momentum increment is the midpoint moment of the boundary
    // loads; the applied couple enters through the midpoint frame map, which
    // deviates from the identity only at O(h^2) while the end rotates.
    const int last = lay.n_nodes - 1;
    const Vec3 phi_mid = 0.5 * (x_prev.segment<3>(lay.phi_offset(last)) +
                                state.x.segment<3>(lay.phi_offset(last)));
    const Vec9 d_mid = 0.5 * (x_prev.segment<9>(lay.dir_offset(last)) +
                              state.x.segment<9>(lay.dir_offset(last)));
    const Mat93 tmap = angular_velocity_map(d_mid);
    const Vec3 moment_exact = 2.0 * tmap.transpose() * (tmap * loads.moment_end);
    const Vec3 dl = h * (phi_mid.cross(loads.force_end) + moment_exact);
    EXPECT_LT((after.angular - before.angular - dl).norm(),
              1e-10 * std::max(1.0, after.angular.norm()));
    // The idealized form (raw applied couple) holds to O(h^2) during loading.
    const Vec3 dl_ideal = h * (phi_mid.cross(loads.force_end) + loads.moment_end);
    EXPECT_LT((after.angular - before.angular - dl_ideal).norm(),
              1e-2 * std::max(1.0, after.angular.norm()));
  }
}

TEST(Step, LinearElementsConserveEnergyToo) {
  // Order-1 displacements with per-element constant stresses.
  Scenario sc = free_rod(4);
  sc.order = 1;
  const RodSystem sys(sc);
  const StateLayout& lay = sys.layout();
  const MidpointIntegrator integrator(sys, sc.solver);
  GlobalState state = integrator.initialize();
  const Vec3 omega(0.4, 0.2, -0.7);
  for (int i = 0; i < lay.n_nodes; ++i) {
    const Vec3 phi = state.x.segment<3>(lay.phi_offset(i));
    state.x.segment<3>(lay.vphi_offset(i)) = omega.cross(phi);
    for (int a = 0; a < 3; ++a)
      state.x.segment<3>(lay.vdir_offset(i) + 3 * a) =
          omega.cross(state.x.segment<3>(lay.dir_offset(i) + 3 * a));
  }
  double h_prev = energy(state, sys);
  for (int n = 0; n < 6; ++n) {
    state = integrator.step(state);
    const double h_now = energy(state, sys);
    EXPECT_LT(std::abs(h_now - h_prev), 1e-11 * std::max(1.0, h_now));
    EXPECT_LT(constraint_violation(state, sys), 1e-12);
    h_prev = h_now;
  }
}

TEST(Step, FiniteDifferenceModeIntegrates) {
  Scenario sc = free_rod(1);
  sc.solver.jacobian_mode = SolverSettings::JacobianMode::finite_difference;
  sc.solver.t_end = 0.1;
  sc.force_end = {{Vec3(0.0, 0.5, 0.0), TimeSignal::constant(1.0)}};
  const RodSystem sys(sc);
  const MidpointIntegrator integrator(sys, sc.solver);
  GlobalState state = integrator.initialize();
  double h_prev = energy(state, sys);
  for (int n = 0; n < 2; ++n) {
    StepStats stats;
    state = integrator.step(state, &stats);
    const double h_now = energy(state, sys);
    EXPECT_LT(std::abs(h_now - h_prev - stats.external_work), 1e-11 * std::max(1.0, h_now));
    h_prev = h_now;
  }
}

TEST(Step, NonConvergenceRaisesSolverError) {
  Scenario sc = builtin_scenario("flying_spaghetti");
  sc.solver.eps_newton = 1e-300;
  sc.solver.max_newton_iters = 2;
  const RodSystem sys(sc);
  const MidpointIntegrator integrator(sys, sc.solver);
  GlobalState state = integrator.initialize();
  try {
    state = integrator.step(state);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("did not converge"), std::string::npos);
    EXPECT_NE(msg.find("residual"), std::string::npos);
  }
}

TEST(Initialize, StraightRodIsStressFree) {
  const RodSystem sys(RodSystem(builtin_scenario("flying_spaghetti")));
  const MidpointIntegrator integrator(sys, sys.scenario().solver);
  const GlobalState x0 = integrator.initialize();
  const StateLayout& lay = sys.layout();
  // Stress-free up to roundoff amplified by the stiffness scale.
  EXPECT_LT(x0.x.segment(lay.stress_offset(0), lay.stress_size()).norm(), 1e-9);
  EXPECT_EQ(x0.x.segment(lay.lambda_offset(), lay.lambda_size()).norm(), 0.0);
  EXPECT_LT(energy(x0, sys), 1e-18);
  // Inclined start keeps every nodal frame orthonormal.
  for (int i = 0; i < lay.n_nodes; ++i) {
    const Vec6 g = orthonormality_residual(x0.x.segment<9>(lay.dir_offset(i)));
    EXPECT_LT(g.norm(), 1e-14);
  }
  EXPECT_LT((x0.x.segment<3>(lay.phi_offset(0)) - Vec3(6, 0, 0)).norm(), 1e-14);
  EXPECT_LT((x0.x.segment<3>(lay.phi_offset(lay.n_nodes - 1)) - Vec3(0, 0, 8)).norm(), 1e-14);
}

TEST(Initialize, BentStateProjectsCurvature) {
  Scenario sc = free_rod(8);
  const RodSystem sys(sc);
  const StateLayout& lay = sys.layout();
  const MidpointIntegrator integrator(sys, sc.solver);

  // Circular arc of curvature kappa about e1; frames follow the tangent.
  const double kappa = 0.3;
  VecX q = VecX::Zero(lay.q_size());
  for (int i = 0; i < lay.n_nodes; ++i) {
    const double s = sys.mesh().node_coord(i);
    q.segment<3>(lay.phi_offset(i)) =
        Vec3(0.0, -(std::cos(kappa * s) - 1.0) / kappa, std::sin(kappa * s) / kappa);
    Vec9 d;
    d.segment<3>(0) = Vec3::UnitX();
    d.segment<3>(3) = Vec3(0.0, std::cos(kappa * s), -std::sin(kappa * s));
    d.segment<3>(6) = Vec3(0.0, std::sin(kappa * s), std::cos(kappa * s));
    q.segment<9>(lay.dir_offset(i)) = d;
  }
  const GlobalState x0 = integrator.initialize_from(q);

  // Projection identity holds to machine precision.
  const QuadratureRule quad = quadrature_rule();
  const Vec3 c_kappa = sys.branches().elastic.compliance_kappa;
  VecX resid = VecX::Zero(3 * lay.n_stress);
  for (int e = 0; e < sys.mesh().n_elements(); ++e)
    for (int g = 0; g < 3; ++g) {
      const double xi = quad.points[static_cast<std::size_t>(g)];
      const double w = quad.weights[static_cast<std::size_t>(g)] * sys.mesh().jacobian();
      const StressShapeEval ps = stress_shape_eval(1, xi);
      const RodSystem::GaussPointState st = sys.eval_gauss(q, e, g);
      const StrainPair sp = strain_measures(st.d, st.d_s, st.phi_s);
      Vec3 m_gp = Vec3::Zero();
      for (int a = 0; a < 2; ++a)
        m_gp += ps.value[static_cast<std::size_t>(a)] *
                x0.x.segment<3>(lay.moment_offset(0, sys.mesh().element_stress_node(e, a)));
      const Vec3 diff = c_kappa.asDiagonal() * m_gp - sp.kappa;
      for (int a = 0; a < 2; ++a)
        resid.segment<3>(3 * sys.mesh().element_stress_node(e, a)) +=
            w * ps.value[static_cast<std::size_t>(a)] * diff;
      // Pointwise the projected curvature tracks the analytic one.
      EXPECT_LT((sp.kappa - Vec3(-kappa, 0.0, 0.0)).norm(), 5e-3 * kappa);
      EXPECT_LT((Vec3(c_kappa.asDiagonal() * m_gp) - sp.kappa).norm(), 1e-2 * kappa);
    }
  EXPECT_LT(resid.norm(), 1e-13);
}

TEST(Initialize, NonOrthonormalFramesRejected) {
  const RodSystem sys(free_rod());
  const MidpointIntegrator integrator(sys, sys.scenario().solver);
  VecX q = sys.reference_q();
  q[sys.layout().dir_offset(1)] += 1e-3;
  EXPECT_THROW(integrator.initialize_from(q), ConfigError);
}

TEST(Step, QuasistaticSmallLoadMatchesLinearBeamTheory) {
  // Small-load limit of the constrained (Kirchhoff) cantilever: the tip force
  // and the counteracting tip moment give v = F L^3/(3EI) - M L^2/(2EI).
  Scenario sc = builtin_scenario("quasistatic_cantilever_constrained");
  sc.solver.t_end = 0.02;
  const RodSystem sys(sc);
  const StateLayout& lay = sys.layout();
  const MidpointIntegrator integrator(sys, sc.solver);
  GlobalState state = integrator.initialize();
  for (int i = 0; i < 2; ++i) state = integrator.step(state);
  const double L = sc.geometry.length;
  const double EI = sc.material.kB1.value;
  const double P = 10.0 * EI / (L * L);
  const double t = state.t;
  const double v_lin = t * P * L * L * L / (3.0 * EI) - 2.5 * t * P * L * L / (2.0 * EI);
  const double v = -state.x[lay.phi_offset(lay.n_nodes - 1) + 1];
  EXPECT_NEAR(v, v_lin, 1e-2 * std::abs(v_lin));
}

TEST(Step, StrainConsistencyThroughoutRun) {
  Scenario sc = builtin_scenario("cantilever_oscillation");
  sc.solver.t_end = 0.02;
  const RodSystem sys(sc);
  const StateLayout& lay = sys.layout();
  const MidpointIntegrator integrator(sys, sc.solver);
  GlobalState state = integrator.initialize();
  const QuadratureRule quad = quadrature_rule();
  for (int n = 0; n < 20; ++n) {
    state = integrator.step(state);
    // Variational consistency: psi-projection of (C sigma + eps0 - eps(q)) = 0.
    const VecX q = state.x.segment(0, lay.q_size());
    const Vec3 c_kappa = sys.branches().elastic.compliance_kappa;
    VecX resid = VecX::Zero(6 * lay.n_stress);
    for (int e = 0; e < sys.mesh().n_elements(); ++e)
      for (int g = 0; g < 3; ++g) {
        const double xi = quad.points[static_cast<std::size_t>(g)];
        const double w = quad.weights[static_cast<std::size_t>(g)] * sys.mesh().jacobian();
        const StressShapeEval ps = stress_shape_eval(1, xi);
        const RodSystem::GaussPointState st = sys.eval_gauss(q, e, g);
        const StrainPair sp = strain_measures(st.d, st.d_s, st.phi_s);
        Vec3 m_gp = Vec3::Zero();
        for (int a = 0; a < 2; ++a)
          m_gp += ps.value[static_cast<std::size_t>(a)] *
                  state.x.segment<3>(lay.moment_offset(0, sys.mesh().element_stress_node(e, a)));
        const Vec3 dgamma = Vec3(0, 0, 1) - sp.gamma;  // rigid: C_N sigma = 0
        const Vec3 dkappa = Vec3(c_kappa.asDiagonal() * m_gp) - sp.kappa;
        for (int a = 0; a < 2; ++a) {
          const int ga = sys.mesh().element_stress_node(e, a);
          resid.segment<3>(3 * ga) += w * ps.value[static_cast<std::size_t>(a)] * dgamma;
          resid.segment<3>(3 * lay.n_stress + 3 * ga) +=
              w * ps.value[static_cast<std::size_t>(a)] * dkappa;
        }
      }
    EXPECT_LT(resid.norm(), 1e-9);
  }
}
