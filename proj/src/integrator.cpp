#include "phrod/integrator.hpp"

#include <Eigen/SparseLU>
#include <cmath>

#include "phrod/kinematics.hpp"

namespace phrod {

MidpointIntegrator::MidpointIntegrator(const RodSystem& system, SolverSettings settings)
    : sys_(system), settings_(settings) {
  settings_.validate();
}

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

GlobalState MidpointIntegrator::initialize() const { return initialize_from(sys_.reference_q()); }

GlobalState MidpointIntegrator::initialize_from(const VecX& q) const {
  const StateLayout& lay = sys_.layout();
  const RodMesh& mesh = sys_.mesh();
  GlobalState state;
  state.t = 0.0;
  state.x = VecX::Zero(lay.dim());
  state.x.segment(lay.q_offset(), lay.q_size()) = q;

  for (int i = 0; i < mesh.n_nodes(); ++i) {
    if (!frame_is_orthonormal(state.x.segment<9>(lay.dir_offset(i))))
      throw ConfigError("initial nodal frame is not orthonormal at node " + std::to_string(i));
  }

  // Project the displacement strains onto the stress space, then invert the
  // compliance per non-rigid component. Straight stress-free starts give zero.
  const QuadratureRule quad = quadrature_rule();
  const double jac = mesh.jacobian();
  const int spe = mesh.stress_nodes_per_element();

  // Element Gram matrix of the stress basis.
  MatX gram = MatX::Zero(spe, spe);
  std::vector<VecX> rhs_gamma(3, VecX::Zero(spe)), rhs_kappa(3, VecX::Zero(spe));
  for (int e = 0; e < mesh.n_elements(); ++e) {
    gram.setZero();
    for (auto& r : rhs_gamma) r.setZero();
    for (auto& r : rhs_kappa) r.setZero();
    for (int gp = 0; gp < 3; ++gp) {
      const double w = quad.weights[static_cast<std::size_t>(gp)] * jac;
      const StressShapeEval ps =
          stress_shape_eval(mesh.order() - 1, quad.points[static_cast<std::size_t>(gp)]);
      const RodSystem::GaussPointState st = sys_.eval_gauss(q, e, gp);
      const StrainPair sp = strain_measures(st.d, st.d_s, st.phi_s);
      const Vec3 dgamma = sp.gamma - Vec3(0.0, 0.0, 1.0);
      const Vec3 dkappa = sp.kappa;
      for (int a = 0; a < spe; ++a) {
        const double pa = ps.value[static_cast<std::size_t>(a)];
        for (int b = 0; b < spe; ++b)
          gram(a, b) += w * pa * ps.value[static_cast<std::size_t>(b)];
        for (int c = 0; c < 3; ++c) {
          rhs_gamma[static_cast<std::size_t>(c)](a) += w * pa * dgamma(c);
          rhs_kappa[static_cast<std::size_t>(c)](a) += w * pa * dkappa(c);
        }
      }
    }
    const MatX gram_inv = gram.inverse();
    for (int block = 0; block < lay.n_stress_blocks(); ++block) {
      const BranchMatrices& bm =
          (block == 0) ? sys_.branches().elastic
                       : sys_.branches().viscous[static_cast<std::size_t>(block) - 1];
      for (int c = 0; c < 3; ++c) {
        const VecX pg = gram_inv * rhs_gamma[static_cast<std::size_t>(c)];
        const VecX pk = gram_inv * rhs_kappa[static_cast<std::size_t>(c)];
        for (int a = 0; a < spe; ++a) {
          const int sn = mesh.element_stress_node(e, a);
          if (bm.compliance_gamma(c) != 0.0)
            state.x[lay.normal_offset(block, sn) + c] = pg(a) / bm.compliance_gamma(c);
          if (bm.compliance_kappa(c) != 0.0)
            state.x[lay.moment_offset(block, sn) + c] = pk(a) / bm.compliance_kappa(c);
        }
      }
    }
  }

  // Clamped entries hold their prescribed values exactly.
  for (int i = 0; i < lay.dim(); ++i)
    if (sys_.is_clamped(i)) state.x[i] = sys_.prescribed()[i];
  return state;
}

// ---------------------------------------------------------------------------
// Residual
// ---------------------------------------------------------------------------

VecX MidpointIntegrator::assemble_residual(const VecX& x_next, const VecX& x_prev, double t_prev,
                                           bool apply_dirichlet) const {
  const StateLayout& lay = sys_.layout();
  const double h = settings_.h;
  const double t_mid = t_prev + 0.5 * h;
  const VecX x_mid = 0.5 * (x_prev + x_next);
  const VecX dx = x_next - x_prev;

  const int nq = lay.q_size();
  const VecX q_mid = x_mid.segment(lay.q_offset(), nq);
  const VecX v_mid = x_mid.segment(lay.v_offset(), nq);

  const StructureBlocks blocks = sys_.structure(q_mid);
  const SpMat gd = sys_.constraint(q_mid);
  const VecX f_ext = sys_.external_force(q_mid, t_mid);

  VecX res = VecX::Zero(lay.dim());

  // Kinematic rows.
  res.segment(lay.q_offset(), nq) = dx.segment(lay.q_offset(), nq) - h * v_mid;

  // Momentum rows.
  const int nn = lay.n_nodes;
  const VecX dv = dx.segment(lay.v_offset(), nq);

  VecX mom = VecX::Zero(nq);
  mom.segment(0, 3 * nn) = sys_.material().rhoA * (sys_.mass_phi() * dv.segment(0, 3 * nn));
  mom.segment(3 * nn, 9 * nn) = sys_.mass_dir() * dv.segment(3 * nn, 9 * nn);

  VecX n_total = VecX::Zero(3 * lay.n_stress);
  VecX m_total = VecX::Zero(3 * lay.n_stress);
  for (int b = 0; b < lay.n_stress_blocks(); ++b) {
    n_total += x_mid.segment(lay.normal_offset(b, 0), 3 * lay.n_stress);
    m_total += x_mid.segment(lay.moment_offset(b, 0), 3 * lay.n_stress);
  }
  mom.segment(0, 3 * nn) += h * (blocks.g_phiN.transpose() * n_total);
  mom.segment(3 * nn, 9 * nn) += h * (blocks.g_dN.transpose() * n_total);
  mom.segment(3 * nn, 9 * nn) += h * (blocks.g_dM.transpose() * m_total);
  mom.segment(3 * nn, 9 * nn) +=
      h * (gd.transpose() * x_mid.segment(lay.lambda_offset(), lay.lambda_size()));
  mom -= h * f_ext;
  res.segment(lay.v_offset(), nq) = mom;

  // Stress rows per branch.
  VecX rate = VecX::Zero(lay.stress_size());
  rate.segment(0, 3 * lay.n_stress) =
      blocks.g_phiN * v_mid.segment(0, 3 * nn) + blocks.g_dN * v_mid.segment(3 * nn, 9 * nn);
  rate.segment(3 * lay.n_stress, 3 * lay.n_stress) = blocks.g_dM * v_mid.segment(3 * nn, 9 * nn);
  for (int b = 0; b < lay.n_stress_blocks(); ++b) {
    VecX sres = sys_.compliance(b) * dx.segment(lay.stress_offset(b), lay.stress_size());
    sres -= h * rate;
    if (b > 0)
      sres += h * (sys_.dissipation(b) * x_mid.segment(lay.stress_offset(b), lay.stress_size()));
    res.segment(lay.stress_offset(b), lay.stress_size()) = sres;
  }

  // Collocated constraint rows.
  res.segment(lay.lambda_offset(), lay.lambda_size()) = h * (gd * v_mid.segment(3 * nn, 9 * nn));

  if (apply_dirichlet) {
    for (int i = 0; i < lay.dim(); ++i)
      if (sys_.is_clamped(i)) res[i] = x_next[i] - sys_.prescribed()[i];
  }
  return res;
}

VecX MidpointIntegrator::residual(const VecX& x_next, const VecX& x_prev, double t_prev) const {
  return assemble_residual(x_next, x_prev, t_prev, true);
}

// ---------------------------------------------------------------------------
// Jacobian
// ---------------------------------------------------------------------------

SpMat MidpointIntegrator::analytic_jacobian(const VecX& x_next, const VecX& x_prev,
                                            double t_prev) const {
  const StateLayout& lay = sys_.layout();
  const double h = settings_.h;
  const double hh = 0.5 * h;  // midpoint chain factor
  const double t_mid = t_prev + 0.5 * h;
  const VecX x_mid = 0.5 * (x_prev + x_next);

  const int nq = lay.q_size();
  const int nn = lay.n_nodes;
  const int ns3 = 3 * lay.n_stress;
  const VecX q_mid = x_mid.segment(lay.q_offset(), nq);
  const VecX v_mid = x_mid.segment(lay.v_offset(), nq);

  const StructureBlocks b_q = sys_.structure(q_mid);
  const StructureBlocks b_v = sys_.structure(v_mid);  // configuration gradient of the rates
  const SpMat gd_q = sys_.constraint(q_mid);
  const SpMat gd_v = sys_.constraint(v_mid);

  VecX n_total = VecX::Zero(ns3), m_total = VecX::Zero(ns3);
  for (int b = 0; b < lay.n_stress_blocks(); ++b) {
    n_total += x_mid.segment(lay.normal_offset(b, 0), ns3);
    m_total += x_mid.segment(lay.moment_offset(b, 0), ns3);
  }
  const SpMat k_int = sys_.internal_force_qgrad(
      n_total, m_total, x_mid.segment(lay.lambda_offset(), lay.lambda_size()));
  const SpMat k_ext = sys_.external_force_qgrad(q_mid, t_mid);

  std::vector<Triplet> t;
  auto add_sp = [&](const SpMat& m, int row0, int col0, double scale) {
    for (int k = 0; k < m.outerSize(); ++k)
      for (SpMat::InnerIterator it(m, k); it; ++it)
        t.emplace_back(row0 + static_cast<int>(it.row()), col0 + static_cast<int>(it.col()),
                       scale * it.value());
  };

  // Kinematic rows: I on q, -h/2 on v.
  for (int i = 0; i < nq; ++i) {
    t.emplace_back(i, i, 1.0);
    t.emplace_back(i, lay.v_offset() + i, -hh);
  }

  // Momentum rows.
  const double rhoA = sys_.material().rhoA;
  add_sp(sys_.mass_phi(), lay.v_offset(), lay.v_offset(), rhoA);
  add_sp(sys_.mass_dir(), lay.v_offset() + 3 * nn, lay.v_offset() + 3 * nn, 1.0);
  add_sp(k_int, lay.v_offset(), lay.q_offset(), hh);
  add_sp(k_ext, lay.v_offset(), lay.q_offset(), -hh);
  for (int b = 0; b < lay.n_stress_blocks(); ++b) {
    add_sp(SpMat(b_q.g_phiN.transpose()), lay.v_offset(), lay.normal_offset(b, 0), hh);
    add_sp(SpMat(b_q.g_dN.transpose()), lay.v_offset() + 3 * nn, lay.normal_offset(b, 0), hh);
    add_sp(SpMat(b_q.g_dM.transpose()), lay.v_offset() + 3 * nn, lay.moment_offset(b, 0), hh);
  }
  add_sp(SpMat(gd_q.transpose()), lay.v_offset() + 3 * nn, lay.lambda_offset(), hh);

  // Stress rows.
  for (int b = 0; b < lay.n_stress_blocks(); ++b) {
    add_sp(sys_.compliance(b), lay.stress_offset(b), lay.stress_offset(b), 1.0);
    if (b > 0) add_sp(sys_.dissipation(b), lay.stress_offset(b), lay.stress_offset(b), hh);
    // Velocity columns.
    add_sp(b_q.g_phiN, lay.normal_offset(b, 0), lay.v_offset(), -hh);
    add_sp(b_q.g_dN, lay.normal_offset(b, 0), lay.v_offset() + 3 * nn, -hh);
    add_sp(b_q.g_dM, lay.moment_offset(b, 0), lay.v_offset() + 3 * nn, -hh);
    // Configuration columns via the bilinear swap.
    add_sp(b_v.g_phiN, lay.normal_offset(b, 0), lay.q_offset(), -hh);
    add_sp(b_v.g_dN, lay.normal_offset(b, 0), lay.q_offset() + 3 * nn, -hh);
    add_sp(b_v.g_dM, lay.moment_offset(b, 0), lay.q_offset() + 3 * nn, -hh);
  }

  // Constraint rows.
  add_sp(gd_q, lay.lambda_offset(), lay.v_offset() + 3 * nn, hh);
  add_sp(gd_v, lay.lambda_offset(), lay.q_offset() + 3 * nn, hh);

  // Dirichlet rows become identity rows of (x_next - prescribed).
  std::vector<Triplet> kept;
  kept.reserve(t.size());
  for (const Triplet& tr : t)
    if (!sys_.is_clamped(tr.row())) kept.push_back(tr);
  for (int i = 0; i < lay.dim(); ++i)
    if (sys_.is_clamped(i)) kept.emplace_back(i, i, 1.0);

  SpMat jac(lay.dim(), lay.dim());
  jac.setFromTriplets(kept.begin(), kept.end());
  return jac;
}

SpMat MidpointIntegrator::fd_jacobian(const VecX& x_next, const VecX& x_prev,
                                      double t_prev) const {
  const int n = static_cast<int>(x_next.size());
  std::vector<Triplet> t;
  VecX xp = x_next;
  for (int j = 0; j < n; ++j) {
    const double step = settings_.fd_step * std::max(1.0, std::abs(x_next[j]));
    xp[j] = x_next[j] + step;
    const VecX rp = residual(xp, x_prev, t_prev);
    xp[j] = x_next[j] - step;
    const VecX rm = residual(xp, x_prev, t_prev);
    xp[j] = x_next[j];
    const VecX col = (rp - rm) / (2.0 * step);
    for (int i = 0; i < n; ++i)
      if (col[i] != 0.0) t.emplace_back(i, j, col[i]);
  }
  SpMat jac(n, n);
  jac.setFromTriplets(t.begin(), t.end());
  return jac;
}

SpMat MidpointIntegrator::jacobian(const VecX& x_next, const VecX& x_prev, double t_prev) const {
  if (settings_.jacobian_mode == SolverSettings::JacobianMode::analytic)
    return analytic_jacobian(x_next, x_prev, t_prev);
  return fd_jacobian(x_next, x_prev, t_prev);
}

// ---------------------------------------------------------------------------
// Step
// ---------------------------------------------------------------------------

namespace {

struct NewtonOutcome {
  bool converged = false;
  bool singular = false;
  VecX x;
  double norm = 0.0;
  int iterations = 0;
};

}  // namespace

// Backtracked Newton from one start point. Full steps are accepted whenever
// they give sufficient decrease, so converged states are those of plain
// Newton; halving only engages away from the solution.
template <typename Residual, typename Jacobian>
static NewtonOutcome newton_solve(VecX x, double eps, int max_iters, const Residual& residual_fn,
                                  const Jacobian& jacobian_fn) {
  NewtonOutcome out;
  VecX res = residual_fn(x);
  double norm = res.norm();
  int it = 0;
  while (norm > eps && it < max_iters) {
    const SpMat jac = jacobian_fn(x);
    Eigen::SparseLU<SpMat> lu(jac);
    if (lu.info() != Eigen::Success) {
      out.singular = true;
      break;
    }
    const VecX dx = lu.solve(res);
    ++it;
    double alpha = 1.0;
    VecX x_trial, res_trial;
    double norm_trial = 0.0;
    for (int cut = 0;; ++cut) {
      x_trial = x - alpha * dx;
      res_trial = residual_fn(x_trial);
      norm_trial = res_trial.norm();
      if (norm_trial <= (1.0 - 1e-4 * alpha) * norm || cut >= 30) break;
      alpha *= 0.5;
    }
    x = std::move(x_trial);
    res = std::move(res_trial);
    norm = norm_trial;
  }
  out.converged = norm <= eps;
  // Polish: one extra full step drives the residual to its quadratic
  // overshoot so per-step constraint residuals stay at roundoff instead of
  // accumulating at the stop tolerance over long runs.
  if (out.converged && norm > 1e-2 * eps && it < max_iters) {
    const SpMat jac = jacobian_fn(x);
    Eigen::SparseLU<SpMat> lu(jac);
    if (lu.info() == Eigen::Success) {
      const VecX x_pol = x - lu.solve(res);
      const VecX res_pol = residual_fn(x_pol);
      if (res_pol.norm() < norm) {
        x = x_pol;
        norm = res_pol.norm();
        ++it;
      }
    }
  }
  out.x = std::move(x);
  out.norm = norm;
  out.iterations = it;
  return out;
}

GlobalState MidpointIntegrator::step(const GlobalState& prev, StepStats* stats) const {
  const StateLayout& lay = sys_.layout();
  const double h = settings_.h;

  const auto res_fn = [&](const VecX& x) { return residual(x, prev.x, prev.t); };
  const auto jac_fn = [&](const VecX& x) { return jacobian(x, prev.x, prev.t); };

  // Primary predictor: advance the configuration with the previous
  // velocities, keep the dynamic unknowns. At large steps this lands inside
  // the Newton basin where the plain previous state does not; near fold
  // points of the one-step map the previous state can be the better start,
  // so it serves as the deterministic fallback.
  VecX x_kin = prev.x;
  x_kin.segment(lay.q_offset(), lay.q_size()) +=
      h * prev.x.segment(lay.v_offset(), lay.q_size());

  NewtonOutcome outcome = newton_solve(std::move(x_kin), settings_.eps_newton,
                                       settings_.max_newton_iters, res_fn, jac_fn);
  if (!outcome.converged) {
    const NewtonOutcome retry = newton_solve(prev.x, settings_.eps_newton,
                                             settings_.max_newton_iters, res_fn, jac_fn);
    if (retry.converged || (!outcome.singular && retry.norm < outcome.norm)) outcome = retry;
  }
  if (outcome.singular && !outcome.converged)
    throw SolverError("singular Newton matrix at t = " + std::to_string(prev.t) +
                      " (iteration " + std::to_string(outcome.iterations) + ")");
  if (!outcome.converged)
    throw SolverError("Newton did not converge within " +
                      std::to_string(settings_.max_newton_iters) + " iterations at t = " +
                      std::to_string(prev.t) + " (residual " + std::to_string(outcome.norm) +
                      ")");
  VecX x = std::move(outcome.x);
  const int it = outcome.iterations;
  const double norm = outcome.norm;

  GlobalState next;
  next.t = prev.t + h;
  next.x = std::move(x);

  if (stats != nullptr) {
    stats->iterations = it;
    stats->residual_norm = norm;
    const VecX x_mid = 0.5 * (prev.x + next.x);
    const VecX q_mid = x_mid.segment(lay.q_offset(), lay.q_size());
    const VecX v_mid = x_mid.segment(lay.v_offset(), lay.q_size());
    stats->external_work = h * v_mid.dot(sys_.external_force(q_mid, prev.t + 0.5 * h));
    double diss = 0.0;
    for (int b = 1; b < lay.n_stress_blocks(); ++b) {
      const VecX sb = x_mid.segment(lay.stress_offset(b), lay.stress_size());
      diss += sb.dot(sys_.dissipation(b) * sb);
    }
    stats->dissipation = h * diss;
  }
  return next;
}

}  // namespace phrod
