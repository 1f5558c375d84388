#include "phrod/kinematics.hpp"

namespace phrod {

Mat3 skew(const Vec3& a) {
  Mat3 s;
  s << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
      -a.y(), a.x(), 0.0;
  return s;
}

Mat3 rotation_matrix(const Vec9& d) {
  Mat3 r;
  r.col(0) = d.segment<3>(0);
  r.col(1) = d.segment<3>(3);
  r.col(2) = d.segment<3>(6);
  return r;
}

Mat93 tangent_stack(const Vec3& u) {
  Mat93 j = Mat93::Zero();
  j.block<3, 1>(0, 0) = u;
  j.block<3, 1>(3, 1) = u;
  j.block<3, 1>(6, 2) = u;
  return j;
}

Mat39 curvature_map(const Vec9& d) {
  const Vec3 d1 = d.segment<3>(0);
  const Vec3 d2 = d.segment<3>(3);
  const Vec3 d3 = d.segment<3>(6);
  Mat39 l = Mat39::Zero();
  l.block<1, 3>(0, 3) = -0.5 * d3.transpose();
  l.block<1, 3>(0, 6) = 0.5 * d2.transpose();
  l.block<1, 3>(1, 0) = 0.5 * d3.transpose();
  l.block<1, 3>(1, 6) = -0.5 * d1.transpose();
  l.block<1, 3>(2, 0) = -0.5 * d2.transpose();
  l.block<1, 3>(2, 3) = 0.5 * d1.transpose();
  return l;
}

Mat93 angular_velocity_map(const Vec9& d) {
  Mat93 t;
  t.block<3, 3>(0, 0) = -0.5 * skew(d.segment<3>(0));
  t.block<3, 3>(3, 0) = -0.5 * skew(d.segment<3>(3));
  t.block<3, 3>(6, 0) = -0.5 * skew(d.segment<3>(6));
  return t;
}

Vec6 orthonormality_residual(const Vec9& d) {
  const Vec3 d1 = d.segment<3>(0);
  const Vec3 d2 = d.segment<3>(3);
  const Vec3 d3 = d.segment<3>(6);
  Vec6 g;
  g(0) = 0.5 * (d1.dot(d1) - 1.0);
  g(1) = 0.5 * (d2.dot(d2) - 1.0);
  g(2) = 0.5 * (d3.dot(d3) - 1.0);
  g(3) = 0.5 * d1.dot(d2);
  g(4) = 0.5 * d2.dot(d3);
  g(5) = 0.5 * d3.dot(d1);
  return g;
}

Mat69 orthonormality_gradient(const Vec9& d) {
  const Vec3 d1 = d.segment<3>(0);
  const Vec3 d2 = d.segment<3>(3);
  const Vec3 d3 = d.segment<3>(6);
  Mat69 g = Mat69::Zero();
  g.block<1, 3>(0, 0) = d1.transpose();
  g.block<1, 3>(1, 3) = d2.transpose();
  g.block<1, 3>(2, 6) = d3.transpose();
  g.block<1, 3>(3, 0) = 0.5 * d2.transpose();
  g.block<1, 3>(3, 3) = 0.5 * d1.transpose();
  g.block<1, 3>(4, 3) = 0.5 * d3.transpose();
  g.block<1, 3>(4, 6) = 0.5 * d2.transpose();
  g.block<1, 3>(5, 0) = 0.5 * d3.transpose();
  g.block<1, 3>(5, 6) = 0.5 * d1.transpose();
  return g;
}

StrainPair strain_measures(const Vec9& d, const Vec9& d_s, const Vec3& phi_s) {
  StrainPair sp;
  sp.gamma = rotation_matrix(d).transpose() * phi_s;
  sp.kappa = curvature_map(d_s) * d;
  return sp;
}

Mat39 director_combination(const Vec3& f) {
  Mat39 w = Mat39::Zero();
  w.block<3, 3>(0, 0) = f.x() * Mat3::Identity();
  w.block<3, 3>(0, 3) = f.y() * Mat3::Identity();
  w.block<3, 3>(0, 6) = f.z() * Mat3::Identity();
  return w;
}

Mat99 curvature_weighted(const Vec3& m) {
  // Block (i,k) of d/dx [curvature_map(x)^T m] is eps_ijk m_j / 2 times I.
  Mat99 lam = Mat99::Zero();
  const Mat3 sm = 0.5 * skew(m);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      lam.block<3, 3>(3 * i, 3 * k) = sm(i, k) * Mat3::Identity();
  return lam;
}

Mat99 orthonormality_hessian(const Vec6& lambda) {
  Mat99 h = Mat99::Zero();
  const Mat3 id = Mat3::Identity();
  h.block<3, 3>(0, 0) = lambda(0) * id;
  h.block<3, 3>(3, 3) = lambda(1) * id;
  h.block<3, 3>(6, 6) = lambda(2) * id;
  h.block<3, 3>(0, 3) = 0.5 * lambda(3) * id;
  h.block<3, 3>(3, 0) = 0.5 * lambda(3) * id;
  h.block<3, 3>(3, 6) = 0.5 * lambda(4) * id;
  h.block<3, 3>(6, 3) = 0.5 * lambda(4) * id;
  h.block<3, 3>(0, 6) = 0.5 * lambda(5) * id;
  h.block<3, 3>(6, 0) = 0.5 * lambda(5) * id;
  return h;
}

Mat99 angular_velocity_weighted(const Vec3& m) {
  // angular_velocity_map(d) m = 1/2 (m x d1, m x d2, m x d3).
  Mat99 t = Mat99::Zero();
  const Mat3 sm = 0.5 * skew(m);
  t.block<3, 3>(0, 0) = sm;
  t.block<3, 3>(3, 3) = sm;
  t.block<3, 3>(6, 6) = sm;
  return t;
}

Vec9 frame_from_axis(const Vec3& axis) {
  const Vec3 u = axis.normalized();
  const Vec3 e3 = Vec3::UnitZ();
  const double c = e3.dot(u);
  Mat3 r;
  if (c < -1.0 + 1e-14) {
    // Antiparallel axis: rotate half a turn about e1.
    r = Eigen::AngleAxisd(M_PI, Vec3::UnitX()).toRotationMatrix();
  } else {
    const Vec3 w = e3.cross(u);
    const Mat3 sw = skew(w);
    r = Mat3::Identity() + sw + sw * sw / (1.0 + c);
  }
  Vec9 d;
  d.segment<3>(0) = r.col(0);
  d.segment<3>(3) = r.col(1);
  d.segment<3>(6) = r.col(2);
  return d;
}

bool frame_is_orthonormal(const Vec9& d, double tol) {
  return orthonormality_residual(d).cwiseAbs().maxCoeff() <= tol &&
         rotation_matrix(d).determinant() > 0.0;
}

}  // namespace phrod
