#include "phrod/system.hpp"

#include <cmath>

#include "phrod/kinematics.hpp"

namespace phrod {

namespace {

void add_block(std::vector<Triplet>& out, int row0, int col0,
               const Eigen::Ref<const MatX>& block, double scale = 1.0) {
  for (int r = 0; r < block.rows(); ++r)
    for (int c = 0; c < block.cols(); ++c) {
      const double v = scale * block(r, c);
      if (v != 0.0) out.emplace_back(row0 + r, col0 + c, v);
    }
}

SpMat from_triplets(int rows, int cols, std::vector<Triplet>& trips) {
  SpMat m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

// Selects director alpha (0-based) from a frame 9-vector.
Mat39 director_selector(int alpha) {
  Mat39 s = Mat39::Zero();
  s.block<3, 3>(0, 3 * alpha) = Mat3::Identity();
  return s;
}

}  // namespace

RodSystem::RodSystem(Scenario scenario)
    : scenario_(std::move(scenario)),
      mesh_(scenario_.geometry.length, scenario_.n_elements, scenario_.order) {
  scenario_.validate();
  layout_.n_nodes = mesh_.n_nodes();
  layout_.n_stress = mesh_.n_stress_nodes();
  layout_.n_branches = static_cast<int>(scenario_.maxwell.size());
  split_ = branch_split(scenario_.material, scenario_.maxwell);
  build_constant_matrices();
  build_dirichlet();
}

void RodSystem::build_constant_matrices() {
  const int nn = mesh_.n_nodes();
  const int ns = mesh_.n_stress_nodes();
  const QuadratureRule quad = quadrature_rule();
  const double jac = mesh_.jacobian();
  const int npe = mesh_.nodes_per_element();
  const int spe = mesh_.stress_nodes_per_element();

  std::vector<Triplet> t_phi, t_dir;
  const Mat99 mrho = scenario_.material.director_inertia();

  for (int e = 0; e < mesh_.n_elements(); ++e) {
    for (int gp = 0; gp < 3; ++gp) {
      const double w = quad.weights[static_cast<std::size_t>(gp)] * jac;
      const ShapeEval sh = shape_eval(mesh_.order(), quad.points[static_cast<std::size_t>(gp)]);
      for (int i = 0; i < npe; ++i) {
        const int gi = mesh_.element_node(e, i);
        for (int k = 0; k < npe; ++k) {
          const int gk = mesh_.element_node(e, k);
          const double mik = w * sh.value[static_cast<std::size_t>(i)] *
                             sh.value[static_cast<std::size_t>(k)];
          for (int c = 0; c < 3; ++c) t_phi.emplace_back(3 * gi + c, 3 * gk + c, mik);
          for (int c = 0; c < 9; ++c) {
            const double v = mik * mrho(c, c);
            if (v != 0.0) t_dir.emplace_back(9 * gi + c, 9 * gk + c, v);
          }
        }
      }
    }
  }
  mass_phi_ = from_triplets(3 * nn, 3 * nn, t_phi);
  mass_dir_ = from_triplets(9 * nn, 9 * nn, t_dir);

  const int n_blocks = layout_.n_stress_blocks();
  compliance_.clear();
  dissipation_.clear();
  for (int b = 0; b < n_blocks; ++b) {
    const BranchMatrices& bm = (b == 0) ? split_.elastic : split_.viscous[static_cast<std::size_t>(b) - 1];
    std::vector<Triplet> t_c, t_r;
    for (int e = 0; e < mesh_.n_elements(); ++e) {
      for (int gp = 0; gp < 3; ++gp) {
        const double w = quad.weights[static_cast<std::size_t>(gp)] * jac;
        const StressShapeEval ps =
            stress_shape_eval(mesh_.order() - 1, quad.points[static_cast<std::size_t>(gp)]);
        for (int a = 0; a < spe; ++a) {
          const int ga = mesh_.element_stress_node(e, a);
          for (int bb = 0; bb < spe; ++bb) {
            const int gb = mesh_.element_stress_node(e, bb);
            const double mab = w * ps.value[static_cast<std::size_t>(a)] *
                               ps.value[static_cast<std::size_t>(bb)];
            for (int c = 0; c < 3; ++c) {
              if (bm.compliance_gamma(c) != 0.0)
                t_c.emplace_back(3 * ga + c, 3 * gb + c, mab * bm.compliance_gamma(c));
              if (bm.compliance_kappa(c) != 0.0)
                t_c.emplace_back(3 * ns + 3 * ga + c, 3 * ns + 3 * gb + c,
                                 mab * bm.compliance_kappa(c));
              if (b > 0) {
                if (bm.inv_viscosity_gamma(c) != 0.0)
                  t_r.emplace_back(3 * ga + c, 3 * gb + c, mab * bm.inv_viscosity_gamma(c));
                if (bm.inv_viscosity_kappa(c) != 0.0)
                  t_r.emplace_back(3 * ns + 3 * ga + c, 3 * ns + 3 * gb + c,
                                   mab * bm.inv_viscosity_kappa(c));
              }
            }
          }
        }
      }
    }
    compliance_.push_back(from_triplets(6 * ns, 6 * ns, t_c));
    if (b > 0) dissipation_.push_back(from_triplets(6 * ns, 6 * ns, t_r));
  }
}

void RodSystem::build_dirichlet() {
  const int nn = mesh_.n_nodes();
  const RodGeometry& geo = scenario_.geometry;
  reference_q_ = VecX::Zero(layout_.q_size());
  const Vec9 frame = frame_from_axis(geo.axis());
  for (int i = 0; i < nn; ++i) {
    const double s = mesh_.node_coord(i);
    reference_q_.segment<3>(layout_.phi_offset(i)) = geo.start + (s / geo.length) * (geo.end - geo.start);
    reference_q_.segment<9>(layout_.dir_offset(i)) = frame;
  }

  clamped_.assign(static_cast<std::size_t>(layout_.dim()), 0);
  prescribed_ = VecX::Zero(layout_.dim());

  for (const NodeClamp& clamp : scenario_.dirichlet.clamps) {
    if (clamp.node < 0 || clamp.node >= nn)
      throw ConfigError("Dirichlet clamp references a node outside the mesh");
    for (int c = 0; c < 3; ++c) {
      if (!clamp.position[static_cast<std::size_t>(c)]) continue;
      const int qd = layout_.phi_offset(clamp.node) + c;
      clamped_[static_cast<std::size_t>(qd)] = 1;
      prescribed_[qd] = reference_q_[qd];
      clamped_[static_cast<std::size_t>(layout_.v_offset() + qd)] = 1;
    }
    for (int c = 0; c < 9; ++c) {
      if (!clamp.frame[static_cast<std::size_t>(c)]) continue;
      const int qd = layout_.dir_offset(clamp.node) + c;
      clamped_[static_cast<std::size_t>(qd)] = 1;
      prescribed_[qd] = reference_q_[qd];
      clamped_[static_cast<std::size_t>(layout_.v_offset() + qd)] = 1;
    }
    if (clamp.clamps_all_frame()) {
      // The constraint rows of a fully prescribed frame vanish identically;
      // drop the multipliers.
      for (int c = 0; c < 6; ++c)
        clamped_[static_cast<std::size_t>(layout_.lambda_node_offset(clamp.node) + c)] = 1;
    }
  }

  // Rigid slots of viscous branches duplicate the elastic branch's constraint
  // rows (only the stress sum is determined); pin them to zero.
  for (int b = 1; b < layout_.n_stress_blocks(); ++b) {
    const BranchMatrices& bm = split_.viscous[static_cast<std::size_t>(b) - 1];
    for (int sn = 0; sn < layout_.n_stress; ++sn)
      for (int c = 0; c < 3; ++c) {
        if (bm.compliance_gamma(c) == 0.0)
          clamped_[static_cast<std::size_t>(layout_.normal_offset(b, sn) + c)] = 1;
        if (bm.compliance_kappa(c) == 0.0)
          clamped_[static_cast<std::size_t>(layout_.moment_offset(b, sn) + c)] = 1;
      }
  }

  // A loaded Neumann end must not be clamped.
  auto end_clamped = [&](int node) {
    for (int c = 0; c < 3; ++c)
      if (is_clamped(layout_.phi_offset(node) + c)) return true;
    for (int c = 0; c < 9; ++c)
      if (is_clamped(layout_.dir_offset(node) + c)) return true;
    return false;
  };
  if (scenario_.has_end_load(false) && end_clamped(0))
    throw ConfigError("Neumann load applied at the clamped end s = 0");
  if (scenario_.has_end_load(true) && end_clamped(nn - 1))
    throw ConfigError("Neumann load applied at the clamped end s = L");
}

RodSystem::GaussPointState RodSystem::eval_gauss(const VecX& qlike, int element, int gp) const {
  const QuadratureRule quad = quadrature_rule();
  const ShapeEval sh = shape_eval(mesh_.order(), quad.points[static_cast<std::size_t>(gp)]);
  const double inv_jac = 1.0 / mesh_.jacobian();
  GaussPointState st;
  st.phi_s.setZero();
  st.d.setZero();
  st.d_s.setZero();
  for (int i = 0; i < mesh_.nodes_per_element(); ++i) {
    const int gi = mesh_.element_node(element, i);
    const double n = sh.value[static_cast<std::size_t>(i)];
    const double dn = sh.deriv[static_cast<std::size_t>(i)] * inv_jac;
    st.phi_s += dn * qlike.segment<3>(layout_.phi_offset(gi));
    st.d += n * qlike.segment<9>(layout_.dir_offset(gi));
    st.d_s += dn * qlike.segment<9>(layout_.dir_offset(gi));
  }
  return st;
}

StructureBlocks RodSystem::structure(const VecX& qlike) const {
  const int nn = mesh_.n_nodes();
  const int ns = mesh_.n_stress_nodes();
  const QuadratureRule quad = quadrature_rule();
  const double jac = mesh_.jacobian();
  const double inv_jac = 1.0 / jac;

  std::vector<Triplet> t_phiN, t_dN, t_dM;
  for (int e = 0; e < mesh_.n_elements(); ++e) {
    for (int gp = 0; gp < 3; ++gp) {
      const double xi = quad.points[static_cast<std::size_t>(gp)];
      const double w = quad.weights[static_cast<std::size_t>(gp)] * jac;
      const ShapeEval sh = shape_eval(mesh_.order(), xi);
      const StressShapeEval ps = stress_shape_eval(mesh_.order() - 1, xi);
      const GaussPointState st = eval_gauss(qlike, e, gp);

      const Mat3 rt = rotation_matrix(st.d).transpose();
      const Mat93 jn = tangent_stack(st.phi_s);
      const Mat39 l_ds = curvature_map(st.d_s);
      const Mat39 l_d = curvature_map(st.d);

      for (int a = 0; a < mesh_.stress_nodes_per_element(); ++a) {
        const int ga = mesh_.element_stress_node(e, a);
        const double pa = ps.value[static_cast<std::size_t>(a)];
        for (int i = 0; i < mesh_.nodes_per_element(); ++i) {
          const int gi = mesh_.element_node(e, i);
          const double n = sh.value[static_cast<std::size_t>(i)];
          const double dn = sh.deriv[static_cast<std::size_t>(i)] * inv_jac;
          add_block(t_phiN, 3 * ga, 3 * gi, rt, w * pa * dn);
          add_block(t_dN, 3 * ga, 9 * gi, jn.transpose(), w * pa * n);
          add_block(t_dM, 3 * ga, 9 * gi, l_ds * n - l_d * dn, w * pa);
        }
      }
    }
  }
  StructureBlocks blocks;
  blocks.g_phiN = from_triplets(3 * ns, 3 * nn, t_phiN);
  blocks.g_dN = from_triplets(3 * ns, 9 * nn, t_dN);
  blocks.g_dM = from_triplets(3 * ns, 9 * nn, t_dM);
  return blocks;
}

SpMat RodSystem::constraint(const VecX& qlike) const {
  const int nn = mesh_.n_nodes();
  std::vector<Triplet> t;
  for (int i = 0; i < nn; ++i) {
    const Mat69 g = orthonormality_gradient(qlike.segment<9>(layout_.dir_offset(i)));
    add_block(t, 6 * i, 9 * i, g);
  }
  return from_triplets(6 * nn, 9 * nn, t);
}

SpMat RodSystem::moment_port(const VecX& qlike) const {
  const int nn = mesh_.n_nodes();
  const QuadratureRule quad = quadrature_rule();
  const double jac = mesh_.jacobian();
  std::vector<Triplet> t;
  for (int e = 0; e < mesh_.n_elements(); ++e) {
    for (int gp = 0; gp < 3; ++gp) {
      const double w = quad.weights[static_cast<std::size_t>(gp)] * jac;
      const ShapeEval sh = shape_eval(mesh_.order(), quad.points[static_cast<std::size_t>(gp)]);
      const Mat93 tmap = angular_velocity_map(eval_gauss(qlike, e, gp).d);
      for (int i = 0; i < mesh_.nodes_per_element(); ++i) {
        const int gi = mesh_.element_node(e, i);
        for (int k = 0; k < mesh_.nodes_per_element(); ++k) {
          const int gk = mesh_.element_node(e, k);
          add_block(t, 9 * gi, 3 * gk,
                    tmap, w * sh.value[static_cast<std::size_t>(i)] * sh.value[static_cast<std::size_t>(k)]);
        }
      }
    }
  }
  return from_triplets(9 * nn, 3 * nn, t);
}

SpMat RodSystem::descriptor() const {
  const int nn = mesh_.n_nodes();
  std::vector<Triplet> t;
  for (int i = 0; i < layout_.q_size(); ++i) t.emplace_back(i, i, 1.0);
  const double rhoA = scenario_.material.rhoA;
  for (int k = 0; k < mass_phi_.outerSize(); ++k)
    for (SpMat::InnerIterator it(mass_phi_, k); it; ++it) {
      const double v = rhoA * it.value();
      if (v != 0.0)
        t.emplace_back(layout_.v_offset() + static_cast<int>(it.row()),
                       layout_.v_offset() + static_cast<int>(it.col()), v);
    }
  const int vd0 = layout_.v_offset() + 3 * nn;
  for (int k = 0; k < mass_dir_.outerSize(); ++k)
    for (SpMat::InnerIterator it(mass_dir_, k); it; ++it)
      t.emplace_back(vd0 + static_cast<int>(it.row()), vd0 + static_cast<int>(it.col()), it.value());
  for (int b = 0; b < layout_.n_stress_blocks(); ++b) {
    const SpMat& c = compliance_[static_cast<std::size_t>(b)];
    const int off = layout_.stress_offset(b);
    for (int k = 0; k < c.outerSize(); ++k)
      for (SpMat::InnerIterator it(c, k); it; ++it)
        t.emplace_back(off + static_cast<int>(it.row()), off + static_cast<int>(it.col()), it.value());
  }
  return from_triplets(layout_.dim(), layout_.dim(), t);
}

SpMat RodSystem::dissipation_matrix() const {
  std::vector<Triplet> t;
  for (int b = 1; b < layout_.n_stress_blocks(); ++b) {
    const SpMat& r = dissipation(b);
    const int off = layout_.stress_offset(b);
    for (int k = 0; k < r.outerSize(); ++k)
      for (SpMat::InnerIterator it(r, k); it; ++it)
        t.emplace_back(off + static_cast<int>(it.row()), off + static_cast<int>(it.col()), it.value());
  }
  return from_triplets(layout_.dim(), layout_.dim(), t);
}

VecX RodSystem::costate(const VecX& x) const {
  VecX z = x;
  z.segment(layout_.q_offset(), layout_.q_size()).setZero();
  return z;
}

SpMat RodSystem::structure_matrix(const VecX& qhat) const {
  const int nn = mesh_.n_nodes();
  const StructureBlocks blocks = structure(qhat);
  const SpMat gd = constraint(qhat);
  std::vector<Triplet> t;

  // Kinematic identity block and its negative transpose.
  for (int i = 0; i < layout_.q_size(); ++i) {
    t.emplace_back(i, layout_.v_offset() + i, 1.0);
    t.emplace_back(layout_.v_offset() + i, i, -1.0);
  }

  const int vphi0 = layout_.v_offset();
  const int vdir0 = layout_.v_offset() + 3 * nn;
  auto place_sigma_block = [&](const SpMat& g, int stress_row0, int vcol0) {
    for (int k = 0; k < g.outerSize(); ++k)
      for (SpMat::InnerIterator it(g, k); it; ++it) {
        const int sr = stress_row0 + static_cast<int>(it.row());
        const int vc = vcol0 + static_cast<int>(it.col());
        t.emplace_back(sr, vc, it.value());
        t.emplace_back(vc, sr, -it.value());
      }
  };
  for (int b = 0; b < layout_.n_stress_blocks(); ++b) {
    place_sigma_block(blocks.g_phiN, layout_.normal_offset(b, 0), vphi0);
    place_sigma_block(blocks.g_dN, layout_.normal_offset(b, 0), vdir0);
    place_sigma_block(blocks.g_dM, layout_.moment_offset(b, 0), vdir0);
  }
  for (int k = 0; k < gd.outerSize(); ++k)
    for (SpMat::InnerIterator it(gd, k); it; ++it) {
      const int lr = layout_.lambda_offset() + static_cast<int>(it.row());
      const int vc = vdir0 + static_cast<int>(it.col());
      t.emplace_back(lr, vc, it.value());
      t.emplace_back(vc, lr, -it.value());
    }
  return from_triplets(layout_.dim(), layout_.dim(), t);
}

SpMat RodSystem::internal_force_qgrad(const VecX& n_total, const VecX& m_total,
                                      const VecX& lambda) const {
  const int nn = mesh_.n_nodes();
  const QuadratureRule quad = quadrature_rule();
  const double jac = mesh_.jacobian();
  const double inv_jac = 1.0 / jac;
  std::vector<Triplet> t;

  for (int e = 0; e < mesh_.n_elements(); ++e) {
    for (int gp = 0; gp < 3; ++gp) {
      const double xi = quad.points[static_cast<std::size_t>(gp)];
      const double w = quad.weights[static_cast<std::size_t>(gp)] * jac;
      const StressShapeEval ps = stress_shape_eval(mesh_.order() - 1, xi);
      const ShapeEval sh = shape_eval(mesh_.order(), xi);

      Vec3 n_gp = Vec3::Zero();
      Vec3 m_gp = Vec3::Zero();
      for (int a = 0; a < mesh_.stress_nodes_per_element(); ++a) {
        const int ga = mesh_.element_stress_node(e, a);
        n_gp += ps.value[static_cast<std::size_t>(a)] * n_total.segment<3>(3 * ga);
        m_gp += ps.value[static_cast<std::size_t>(a)] * m_total.segment<3>(3 * ga);
      }
      const Mat39 comb = director_combination(n_gp);
      const Mat99 lam = curvature_weighted(m_gp);

      for (int i = 0; i < mesh_.nodes_per_element(); ++i) {
        const int gi = mesh_.element_node(e, i);
        const double ni = sh.value[static_cast<std::size_t>(i)];
        const double dni = sh.deriv[static_cast<std::size_t>(i)] * inv_jac;
        for (int k = 0; k < mesh_.nodes_per_element(); ++k) {
          const int gk = mesh_.element_node(e, k);
          const double nk = sh.value[static_cast<std::size_t>(k)];
          const double dnk = sh.deriv[static_cast<std::size_t>(k)] * inv_jac;
          // d/dd [G_phiN(d)^T N] on centerline rows and its transpose.
          add_block(t, layout_.phi_offset(gi), layout_.dir_offset(gk), comb, w * dni * nk);
          add_block(t, layout_.dir_offset(gk), layout_.phi_offset(gi), comb.transpose(), w * dni * nk);
          // Symmetric curvature part d/dd [G_dM(d)^T M].
          add_block(t, layout_.dir_offset(gi), layout_.dir_offset(gk), lam, w * ni * dnk);
          add_block(t, layout_.dir_offset(gk), layout_.dir_offset(gi), lam.transpose(), w * ni * dnk);
        }
      }
    }
  }
  for (int i = 0; i < nn; ++i) {
    const Mat99 h = orthonormality_hessian(lambda.segment<6>(6 * i));
    add_block(t, layout_.dir_offset(i), layout_.dir_offset(i), h);
  }
  return from_triplets(layout_.q_size(), layout_.q_size(), t);
}

VecX RodSystem::distributed_force(const VecX& qhat, const std::function<Vec3(double)>& nbar,
                                  const std::function<Vec3(double)>& mbar) const {
  const QuadratureRule quad = quadrature_rule();
  const double jac = mesh_.jacobian();
  VecX f = VecX::Zero(layout_.q_size());
  for (int e = 0; e < mesh_.n_elements(); ++e) {
    for (int gp = 0; gp < 3; ++gp) {
      const double w = quad.weights[static_cast<std::size_t>(gp)] * jac;
      const double s = mesh_.gauss_coord(e, gp);
      const ShapeEval sh = shape_eval(mesh_.order(), quad.points[static_cast<std::size_t>(gp)]);
      const Vec3 nb = nbar ? nbar(s) : Vec3::Zero();
      const Vec3 mb = mbar ? mbar(s) : Vec3::Zero();
      const Mat93 tmap = angular_velocity_map(eval_gauss(qhat, e, gp).d);
      for (int i = 0; i < mesh_.nodes_per_element(); ++i) {
        const int gi = mesh_.element_node(e, i);
        const double ni = sh.value[static_cast<std::size_t>(i)];
        f.segment<3>(layout_.phi_offset(gi)) += w * ni * nb;
        f.segment<9>(layout_.dir_offset(gi)) += w * ni * (tmap * mb);
      }
    }
  }
  return f;
}

VecX RodSystem::external_force(const VecX& qhat, double t) const {
  const LoadSample loads = eval_loads(scenario_, t);
  VecX f = VecX::Zero(layout_.q_size());
  const int nn = mesh_.n_nodes();

  auto apply_end = [&](int node, const Vec3& force, const Vec3& moment) {
    f.segment<3>(layout_.phi_offset(node)) += force;
    if (!moment.isZero())
      f.segment<9>(layout_.dir_offset(node)) +=
          angular_velocity_map(qhat.segment<9>(layout_.dir_offset(node))) * moment;
  };
  apply_end(0, loads.force_start, loads.moment_start);
  apply_end(nn - 1, loads.force_end, loads.moment_end);

  if (!loads.distributed_force.isZero() || !loads.distributed_moment.isZero()) {
    const Vec3 nb = loads.distributed_force;
    const Vec3 mb = loads.distributed_moment;
    f += distributed_force(qhat, [&](double) { return nb; }, [&](double) { return mb; });
  }
  if (!scenario_.actuators.empty()) f += actuation_force(qhat, loads.tau);
  return f;
}

SpMat RodSystem::external_force_qgrad(const VecX& qhat, double t) const {
  const LoadSample loads = eval_loads(scenario_, t);
  const int nn = mesh_.n_nodes();
  std::vector<Triplet> trips;

  auto end_moment_grad = [&](int node, const Vec3& moment) {
    if (moment.isZero()) return;
    add_block(trips, layout_.dir_offset(node), layout_.dir_offset(node),
              angular_velocity_weighted(moment));
  };
  end_moment_grad(0, loads.moment_start);
  end_moment_grad(nn - 1, loads.moment_end);

  if (!loads.distributed_moment.isZero()) {
    const QuadratureRule quad = quadrature_rule();
    const double jac = mesh_.jacobian();
    const Mat99 g = angular_velocity_weighted(loads.distributed_moment);
    for (int e = 0; e < mesh_.n_elements(); ++e)
      for (int gp = 0; gp < 3; ++gp) {
        const double w = quad.weights[static_cast<std::size_t>(gp)] * jac;
        const ShapeEval sh = shape_eval(mesh_.order(), quad.points[static_cast<std::size_t>(gp)]);
        for (int i = 0; i < mesh_.nodes_per_element(); ++i)
          for (int k = 0; k < mesh_.nodes_per_element(); ++k)
            add_block(trips, layout_.dir_offset(mesh_.element_node(e, i)),
                      layout_.dir_offset(mesh_.element_node(e, k)), g,
                      w * sh.value[static_cast<std::size_t>(i)] * sh.value[static_cast<std::size_t>(k)]);
      }
  }

  SpMat grad = from_triplets(layout_.q_size(), layout_.q_size(), trips);
  if (!scenario_.actuators.empty()) grad += actuation_force_qgrad(qhat, loads.tau);
  return grad;
}

// ---------------------------------------------------------------------------
// Actuation: columns realize the weak-form pair <d phi_s, n_u> and
// <J_K d d, R^T m_u> with n_u = t_k and m_u = rho_k x t_k per unit magnitude.
// ---------------------------------------------------------------------------

namespace {

struct ActuatorGausspoint {
  Vec3 t_dir;          // unit direction of the actuation force
  Vec3 rho;            // offset vector in the current frame
  Vec3 m_tilde;        // rho x t
  Vec3 b;              // R(d)^T m_tilde
  // Derivatives with respect to the local interpolated quantities:
  Mat39 dt_dd;         // d t / d d   (zero for tendon)
  Mat3 dt_dphis;       // d t / d phi_s (tendon only)
  Mat39 dt_dds;        // d t / d d_s   (tendon only)
};

ActuatorGausspoint eval_actuator(const Actuator& act, const RodSystem::GaussPointState& st,
                                 double s_coord) {
  ActuatorGausspoint a;
  const Mat39 s1 = director_selector(0);
  const Mat39 s2 = director_selector(1);
  a.rho = act.offset1 * st.d.segment<3>(0) + act.offset2 * st.d.segment<3>(3);
  a.dt_dd.setZero();
  a.dt_dphis.setZero();
  a.dt_dds.setZero();
  if (act.kind == Actuator::Kind::pneumatic) {
    a.t_dir = st.d.segment<3>(6);
    a.dt_dd = director_selector(2);
  } else {
    const Vec3 r_s = st.phi_s + act.offset1 * st.d_s.segment<3>(0) + act.offset2 * st.d_s.segment<3>(3);
    const double norm = r_s.norm();
    if (norm < 1e-12)
      throw SolverError("tendon tangent is singular at s = " + std::to_string(s_coord));
    a.t_dir = r_s / norm;
    const Mat3 proj = (Mat3::Identity() - a.t_dir * a.t_dir.transpose()) / norm;
    a.dt_dphis = proj;
    a.dt_dds = proj * (act.offset1 * s1 + act.offset2 * s2);
  }
  a.m_tilde = a.rho.cross(a.t_dir);
  a.b = rotation_matrix(st.d).transpose() * a.m_tilde;
  return a;
}

}  // namespace

MatX RodSystem::actuation_columns(const VecX& qhat) const {
  const int n_act = static_cast<int>(scenario_.actuators.size());
  MatX cols = MatX::Zero(layout_.q_size(), n_act);
  const QuadratureRule quad = quadrature_rule();
  const double jac = mesh_.jacobian();
  const double inv_jac = 1.0 / jac;

  for (int k = 0; k < n_act; ++k) {
    const Actuator& act = scenario_.actuators[static_cast<std::size_t>(k)];
    for (int e = 0; e < mesh_.n_elements(); ++e) {
      for (int gp = 0; gp < 3; ++gp) {
        const double w = quad.weights[static_cast<std::size_t>(gp)] * jac;
        const ShapeEval sh = shape_eval(mesh_.order(), quad.points[static_cast<std::size_t>(gp)]);
        const GaussPointState st = eval_gauss(qhat, e, gp);
        const ActuatorGausspoint a = eval_actuator(act, st, mesh_.gauss_coord(e, gp));
        const Mat39 l_ds = curvature_map(st.d_s);
        const Mat39 l_d = curvature_map(st.d);
        for (int i = 0; i < mesh_.nodes_per_element(); ++i) {
          const int gi = mesh_.element_node(e, i);
          const double ni = sh.value[static_cast<std::size_t>(i)];
          const double dni = sh.deriv[static_cast<std::size_t>(i)] * inv_jac;
          cols.col(k).segment<3>(layout_.phi_offset(gi)) -= w * dni * a.t_dir;
          cols.col(k).segment<9>(layout_.dir_offset(gi)) -=
              w * (ni * l_ds - dni * l_d).transpose() * a.b;
        }
      }
    }
  }
  return cols;
}

VecX RodSystem::actuation_force(const VecX& qhat, const std::vector<double>& tau) const {
  const MatX cols = actuation_columns(qhat);
  VecX f = VecX::Zero(layout_.q_size());
  for (int k = 0; k < cols.cols(); ++k) f += tau[static_cast<std::size_t>(k)] * cols.col(k);
  return f;
}

SpMat RodSystem::actuation_force_qgrad(const VecX& qhat, const std::vector<double>& tau) const {
  const QuadratureRule quad = quadrature_rule();
  const double jac = mesh_.jacobian();
  const double inv_jac = 1.0 / jac;
  const int npe = mesh_.nodes_per_element();
  const int n_loc = 12 * npe;  // local column space: phi dofs then director dofs
  std::vector<Triplet> trips;

  const Mat39 s1 = director_selector(0);
  const Mat39 s2 = director_selector(1);

  for (std::size_t k = 0; k < scenario_.actuators.size(); ++k) {
    const Actuator& act = scenario_.actuators[k];
    const double tk = tau[k];
    if (tk == 0.0) continue;
    for (int e = 0; e < mesh_.n_elements(); ++e) {
      MatX local = MatX::Zero(n_loc, n_loc);
      for (int gp = 0; gp < 3; ++gp) {
        const double w = quad.weights[static_cast<std::size_t>(gp)] * jac;
        const ShapeEval sh = shape_eval(mesh_.order(), quad.points[static_cast<std::size_t>(gp)]);
        const GaussPointState st = eval_gauss(qhat, e, gp);
        const ActuatorGausspoint a = eval_actuator(act, st, mesh_.gauss_coord(e, gp));
        const Mat39 l_ds = curvature_map(st.d_s);
        const Mat39 l_d = curvature_map(st.d);

        // Interpolation maps from local dofs to gauss-point quantities.
        Eigen::Matrix<double, 3, Eigen::Dynamic> dphis(3, 3 * npe);
        Eigen::Matrix<double, 9, Eigen::Dynamic> dd(9, 9 * npe), dds(9, 9 * npe);
        dphis.setZero();
        dd.setZero();
        dds.setZero();
        for (int i = 0; i < npe; ++i) {
          const double ni = sh.value[static_cast<std::size_t>(i)];
          const double dni = sh.deriv[static_cast<std::size_t>(i)] * inv_jac;
          dphis.block<3, 3>(0, 3 * i) = dni * Mat3::Identity();
          dd.block<9, 9>(0, 9 * i) = ni * Mat99::Identity();
          dds.block<9, 9>(0, 9 * i) = dni * Mat99::Identity();
        }

        // d t over local dofs.
        MatX dt = MatX::Zero(3, n_loc);
        dt.rightCols(9 * npe) += a.dt_dd * dd + a.dt_dds * dds;
        dt.leftCols(3 * npe) += a.dt_dphis * dphis;

        // d rho and d m_tilde = skew(rho) dt - skew(t) drho.
        MatX drho = MatX::Zero(3, n_loc);
        drho.rightCols(9 * npe) = (act.offset1 * s1 + act.offset2 * s2) * dd;
        MatX dmt = skew(a.rho) * dt - skew(a.t_dir) * drho;

        // d b = d [R(d)^T m_tilde]: tangent-stack swap for the frame part.
        MatX db = rotation_matrix(st.d).transpose() * dmt;
        db.rightCols(9 * npe) += tangent_stack(a.m_tilde).transpose() * dd;

        for (int i = 0; i < npe; ++i) {
          const double ni = sh.value[static_cast<std::size_t>(i)];
          const double dni = sh.deriv[static_cast<std::size_t>(i)] * inv_jac;
          // Centerline rows: -tau w dN_i dt.
          local.block(3 * i, 0, 3, n_loc) -= tk * w * dni * dt;
          // Director rows: product rule over A_i^T b with A_i = ni L(d_s) - dni L(d).
          const Eigen::Matrix<double, 9, 3> ait = (ni * l_ds - dni * l_d).transpose();
          local.block(3 * npe + 9 * i, 0, 9, n_loc) -= tk * w * ait * db;
          // Variation of A_i via the curvature-map swap L(x)^T b = curvature_weighted(b) x.
          const Mat99 cb = curvature_weighted(a.b);
          local.block(3 * npe + 9 * i, 3 * npe, 9, 9 * npe) -=
              tk * w * (ni * cb * dds - dni * cb * dd);
        }
      }
      // Scatter local (rows are forces on v-dofs indexed like q, cols are q).
      std::vector<int> map(static_cast<std::size_t>(n_loc));
      for (int i = 0; i < npe; ++i) {
        const int gi = mesh_.element_node(e, i);
        for (int c = 0; c < 3; ++c) map[static_cast<std::size_t>(3 * i + c)] = layout_.phi_offset(gi) + c;
        for (int c = 0; c < 9; ++c)
          map[static_cast<std::size_t>(3 * npe + 9 * i + c)] = layout_.dir_offset(gi) + c;
      }
      for (int r = 0; r < n_loc; ++r)
        for (int c = 0; c < n_loc; ++c)
          if (local(r, c) != 0.0)
            trips.emplace_back(map[static_cast<std::size_t>(r)], map[static_cast<std::size_t>(c)],
                               local(r, c));
    }
  }
  return from_triplets(layout_.q_size(), layout_.q_size(), trips);
}

RodSystem::BoundaryVelocity RodSystem::boundary_velocity(const VecX& qhat, const VecX& vhat) const {
  const int nn = mesh_.n_nodes();
  BoundaryVelocity out;
  auto at = [&](int node, Vec3& v, Vec3& w) {
    v = vhat.segment<3>(layout_.phi_offset(node));
    w = angular_velocity_map(qhat.segment<9>(layout_.dir_offset(node))).transpose() *
        vhat.segment<9>(layout_.dir_offset(node));
  };
  at(0, out.v_start, out.w_start);
  at(nn - 1, out.v_end, out.w_end);
  return out;
}

}  // namespace phrod
