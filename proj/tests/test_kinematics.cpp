#include "phrod/kinematics.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace phrod;

namespace {

std::mt19937 rng(20240901);

Vec3 random_vec3() {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return Vec3(u(rng), u(rng), u(rng));
}

Vec9 random_vec9() {
  Vec9 v;
  for (int i = 0; i < 9; ++i) v[i] = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
  return v;
}

// Frame from a random unit quaternion; the oracle for orthonormal inputs.
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

Vec9 identity_frame() {
  Vec9 d;
  d << 1, 0, 0, 0, 1, 0, 0, 0, 1;
  return d;
}

// Brute-force cross product through the Levi-Civita symbol.
Vec3 levi_civita_cross(const Vec3& a, const Vec3& b) {
  auto eps = [](int i, int j, int k) {
    if (i == j || j == k || i == k) return 0;
    if ((i == 0 && j == 1 && k == 2) || (i == 1 && j == 2 && k == 0) ||
        (i == 2 && j == 0 && k == 1))
      return 1;
    return -1;
  };
  Vec3 c = Vec3::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i] += eps(i, j, k) * a[j] * b[k];
  return c;
}

}  // namespace

TEST(Skew, ZeroVectorGivesZeroMatrix) {
  EXPECT_EQ(skew(Vec3::Zero()).norm(), 0.0);
}

TEST(Skew, CanonicalCrossProduct) {
  const Vec3 r = skew(Vec3::UnitZ()) * Vec3::UnitX();
  EXPECT_EQ(r, Vec3(0, 1, 0));
}

TEST(Skew, MatchesLeviCivitaOracle) {
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 a = random_vec3(), b = random_vec3();
    EXPECT_LT((skew(a) * b - levi_civita_cross(a, b)).norm(), 1e-15);
  }
}

TEST(RotationMatrix, IdentityFrame) {
  EXPECT_EQ(rotation_matrix(identity_frame()), Mat3::Identity());
}

TEST(RotationMatrix, QuaternionFramesAreOrthonormal) {
  for (int trial = 0; trial < 50; ++trial) {
    const Mat3 r = rotation_matrix(random_frame());
    EXPECT_LT((r.transpose() * r - Mat3::Identity()).norm(), 1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
  }
}

TEST(RotationMatrix, SecondColumnIsSecondDirector) {
  const Vec9 d = random_vec9();
  EXPECT_EQ(rotation_matrix(d).col(1), d.segment<3>(3));
}

TEST(StrainMeasures, StraightReference) {
  const StrainPair sp = strain_measures(identity_frame(), Vec9::Zero(), Vec3(0, 0, 1));
  EXPECT_LT((sp.gamma - Vec3(0, 0, 1)).norm(), 1e-15);
  EXPECT_LT(sp.kappa.norm(), 1e-15);
}

TEST(StrainMeasures, ShearReadsOffFirstComponent) {
  const double gamma = 0.37;
  const StrainPair sp = strain_measures(identity_frame(), Vec9::Zero(), Vec3(gamma, 0, 1));
  EXPECT_LT((sp.gamma - Vec3(gamma, 0, 1)).norm(), 1e-15);
  EXPECT_LT(sp.kappa.norm(), 1e-15);
}

TEST(StrainMeasures, TorsionOfRotatingFrame) {
  // Frame rotating about e3 with rate c: the analytic arc-length derivative
  // is d1' = c d2, d2' = -c d1, d3' = 0.
  const double c = 0.83;
  const double s = 0.4;
  Vec9 d, d_s;
  d << std::cos(c * s), std::sin(c * s), 0, -std::sin(c * s), std::cos(c * s), 0, 0, 0, 1;
  d_s << -c * std::sin(c * s), c * std::cos(c * s), 0, -c * std::cos(c * s),
      -c * std::sin(c * s), 0, 0, 0, 0;
  const StrainPair sp = strain_measures(d, d_s, Vec3(0, 0, 1));
  EXPECT_LT((sp.kappa - Vec3(0, 0, c)).norm(), 1e-14);
  EXPECT_LT((sp.gamma - Vec3(0, 0, 1)).norm(), 1e-14);
}

TEST(StrainMeasures, BothRepresentationsAgree) {
  for (int trial = 0; trial < 50; ++trial) {
    const Vec9 d = random_frame();
    const Vec9 d_s = random_vec9();
    const Vec3 phi_s = random_vec3();
    const StrainPair sp = strain_measures(d, d_s, phi_s);
    EXPECT_LT((sp.gamma - tangent_stack(phi_s).transpose() * d).norm(), 1e-13);
    EXPECT_LT((sp.kappa - (-curvature_map(d) * d_s)).norm(), 1e-13);
  }
}

TEST(StrainMeasures, BilinearInEachArgument) {
  const Vec9 d = random_vec9(), d_s = random_vec9();
  const Vec3 a = random_vec3(), b = random_vec3();
  const StrainPair s_ab = strain_measures(d, d_s, a + b);
  const StrainPair s_a = strain_measures(d, d_s, a);
  const StrainPair s_b = strain_measures(d, d_s, b);
  EXPECT_LT((s_ab.gamma - s_a.gamma - s_b.gamma).norm(), 1e-14);
  const Vec9 e = random_vec9(), f = random_vec9();
  const StrainPair k_ef = strain_measures(d, e + f, Vec3::Zero());
  const StrainPair k_e = strain_measures(d, e, Vec3::Zero());
  const StrainPair k_f = strain_measures(d, f, Vec3::Zero());
  EXPECT_LT((k_ef.kappa - k_e.kappa - k_f.kappa).norm(), 1e-14);
}

TEST(StrainMeasures, ObjectivityUnderRigidMotion) {
  for (int trial = 0; trial < 50; ++trial) {
    const Vec9 d = random_frame();
    const Vec9 d_s = random_vec9();
    const Vec3 phi_s = random_vec3();
    const Mat3 lam = rotation_matrix(random_frame());
    Vec9 d2, d2_s;
    for (int i = 0; i < 3; ++i) {
      d2.segment<3>(3 * i) = lam * d.segment<3>(3 * i);
      d2_s.segment<3>(3 * i) = lam * d_s.segment<3>(3 * i);
    }
    const StrainPair a = strain_measures(d, d_s, phi_s);
    const StrainPair b = strain_measures(d2, d2_s, lam * phi_s);
    EXPECT_LT((a.gamma - b.gamma).norm(), 1e-12);
    EXPECT_LT((a.kappa - b.kappa).norm(), 1e-12);
  }
}

TEST(TangentStack, ZeroGivesZero) {
  EXPECT_EQ(tangent_stack(Vec3::Zero()).norm(), 0.0);
}

TEST(TangentStack, ReferenceStrain) {
  const Vec3 g = tangent_stack(Vec3(0, 0, 1)).transpose() * identity_frame();
  EXPECT_EQ(g, Vec3(0, 0, 1));
}

TEST(TangentStack, MatchesRotationTranspose) {
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 u = random_vec3();
    const Vec9 d = random_vec9();
    const Vec3 lhs = tangent_stack(u).transpose() * d;
    const Vec3 rhs = rotation_matrix(d).transpose() * u;
    EXPECT_LT((lhs - rhs).norm(), 1e-15);
  }
}

TEST(CurvatureMap, AnnihilatesOrthonormalFrame) {
  for (int trial = 0; trial < 50; ++trial) {
    const Vec9 d = random_frame();
    EXPECT_LT((curvature_map(d) * d).norm(), 1e-14);
  }
}

TEST(CurvatureMap, ZeroInput) {
  EXPECT_EQ(curvature_map(Vec9::Zero()).norm(), 0.0);
}

TEST(CurvatureMap, TorsionCrossCheck) {
  const double c = 1.7;
  Vec9 d = identity_frame();
  Vec9 d_s;
  d_s << 0, c, 0, -c, 0, 0, 0, 0, 0;  // d1' = c e2, d2' = -c e1
  EXPECT_LT((curvature_map(d_s) * d - Vec3(0, 0, c)).norm(), 1e-15);
}

TEST(AngularVelocityMap, RecoversAngularVelocity) {
  const Vec9 d = random_frame();
  const Vec3 w(0, 0, 1);
  Vec9 d_dot;
  for (int i = 0; i < 3; ++i) d_dot.segment<3>(3 * i) = w.cross(d.segment<3>(3 * i));
  EXPECT_LT((angular_velocity_map(d).transpose() * d_dot - w).norm(), 1e-14);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec9 f = random_frame();
    const Vec3 omega = random_vec3();
    Vec9 rate;
    for (int i = 0; i < 3; ++i) rate.segment<3>(3 * i) = omega.cross(f.segment<3>(3 * i));
    EXPECT_LT((angular_velocity_map(f).transpose() * rate - omega).norm(), 1e-13);
  }
}

TEST(AngularVelocityMap, TransposeAnnihilatesFrame) {
  for (int trial = 0; trial < 20; ++trial) {
    const Vec9 d = random_frame();
    EXPECT_LT((angular_velocity_map(d).transpose() * d).norm(), 1e-14);
  }
}

TEST(AngularVelocityMap, InKernelOfConstraintGradient) {
  for (int trial = 0; trial < 20; ++trial) {
    const Vec9 d = random_frame();
    EXPECT_LT((orthonormality_gradient(d) * angular_velocity_map(d)).norm(), 1e-14);
  }
}

TEST(AngularVelocityMap, NormalizationIsPlusHalfIdentity) {
  // Direct computation for orthonormal frames yields +I/2.
  for (int trial = 0; trial < 20; ++trial) {
    const Mat93 t = angular_velocity_map(random_frame());
    EXPECT_LT((t.transpose() * t - 0.5 * Mat3::Identity()).norm(), 1e-13);
  }
}

TEST(AngularVelocityMap, CurvatureMapCommutation) {
  for (int trial = 0; trial < 20; ++trial) {
    const Vec9 d = random_vec9(), d_s = random_vec9();
    const MatX lhs = curvature_map(d_s) * angular_velocity_map(d);
    const MatX rhs = curvature_map(d) * angular_velocity_map(d_s);
    EXPECT_LT((lhs - rhs).norm(), 1e-13);
  }
}

TEST(AngularVelocityMap, TangentStackContraction) {
  for (int trial = 0; trial < 20; ++trial) {
    const Vec9 d = random_vec9();
    const Vec3 u = random_vec3();
    const Mat3 lhs = angular_velocity_map(d).transpose() * tangent_stack(u);
    const Mat3 rhs = -0.5 * skew(u) * rotation_matrix(d);
    EXPECT_LT((lhs - rhs).norm(), 1e-14);
  }
}

TEST(Orthonormality, IdentityFrameIsExact) {
  EXPECT_EQ(orthonormality_residual(identity_frame()).norm(), 0.0);
}

TEST(Orthonormality, StretchedFirstDirector) {
  Vec9 d = identity_frame();
  d.segment<3>(0) = Vec3(2, 0, 0);
  const Vec6 g = orthonormality_residual(d);
  EXPECT_DOUBLE_EQ(g[0], 1.5);  // (4 - 1) / 2
  EXPECT_EQ(g.tail<5>().norm(), 0.0);
}

TEST(Orthonormality, QuaternionFramesSatisfyConstraint) {
  for (int trial = 0; trial < 50; ++trial)
    EXPECT_LT(orthonormality_residual(random_frame()).norm(), 1e-14);
}

TEST(OrthonormalityGradient, MatchesFiniteDifferences) {
  const double step = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const Vec9 d = random_vec9();
    const Mat69 g = orthonormality_gradient(d);
    for (int j = 0; j < 9; ++j) {
      Vec9 dp = d, dm = d;
      dp[j] += step;
      dm[j] -= step;
      const Vec6 col = (orthonormality_residual(dp) - orthonormality_residual(dm)) / (2 * step);
      EXPECT_LT((g.col(j) - col).norm() / std::max(1.0, col.norm()), 1e-6);
    }
  }
}

TEST(OrthonormalityGradient, IdentityFrameFirstRow) {
  const Mat69 g = orthonormality_gradient(identity_frame());
  Eigen::Matrix<double, 1, 9> row;
  row << 1, 0, 0, 0, 0, 0, 0, 0, 0;
  EXPECT_EQ(g.row(0), row);
}

TEST(Orthonormality, MidpointDirectionalityIsExact) {
  // g is quadratic, so g(b) - g(a) = G((a+b)/2) (b-a) up to roundoff.
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec9 a = random_vec9(), b = random_vec9();
    const Vec6 lhs = orthonormality_residual(b) - orthonormality_residual(a);
    const Vec6 rhs = orthonormality_gradient(0.5 * (a + b)) * (b - a);
    EXPECT_LT((lhs - rhs).norm(), 1e-14);
  }
}

TEST(SwapHelpers, DirectorCombination) {
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 f = random_vec3();
    const Vec9 d = random_vec9();
    EXPECT_LT((director_combination(f) * d - rotation_matrix(d) * f).norm(), 1e-15);
  }
}

TEST(SwapHelpers, CurvatureWeighted) {
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 m = random_vec3();
    const Vec9 x = random_vec9();
    EXPECT_LT((curvature_weighted(m) * x - curvature_map(x).transpose() * m).norm(), 1e-15);
  }
}

TEST(SwapHelpers, OrthonormalityHessian) {
  const double step = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    Vec6 lambda;
    for (int i = 0; i < 6; ++i) lambda[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
    const Vec9 d = random_vec9();
    const Mat99 h = orthonormality_hessian(lambda);
    for (int j = 0; j < 9; ++j) {
      Vec9 dp = d, dm = d;
      dp[j] += step;
      dm[j] -= step;
      const Vec9 col = (orthonormality_gradient(dp).transpose() * lambda -
                        orthonormality_gradient(dm).transpose() * lambda) /
                       (2 * step);
      EXPECT_LT((h.col(j) - col).norm(), 1e-9);
    }
  }
}

TEST(SwapHelpers, AngularVelocityWeighted) {
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 m = random_vec3();
    const Vec9 d = random_vec9();
    EXPECT_LT((angular_velocity_weighted(m) * d - angular_velocity_map(d) * m).norm(), 1e-15);
  }
}

TEST(FrameFromAxis, AlignsThirdDirector) {
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 axis = random_vec3().normalized();
    const Vec9 d = frame_from_axis(axis);
    EXPECT_TRUE(frame_is_orthonormal(d, 1e-12));
    EXPECT_LT((d.segment<3>(6) - axis).norm(), 1e-12);
  }
  // Degenerate antiparallel axis still yields a right-handed frame.
  const Vec9 d = frame_from_axis(-Vec3::UnitZ());
  EXPECT_TRUE(frame_is_orthonormal(d, 1e-12));
  EXPECT_LT((d.segment<3>(6) + Vec3::UnitZ()).norm(), 1e-12);
}
