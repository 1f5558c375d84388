#ifndef PHROD_KINEMATICS_HPP
#define PHROD_KINEMATICS_HPP

#include "phrod/types.hpp"

namespace phrod {

// Pointwise director-frame algebra. A frame is stored as the concatenation
// d = (d1, d2, d3) in R^9; all 9-by-* matrices below follow that layout.
// Everything here is a polynomial map of its arguments, so non-orthonormal
// input (e.g. interpolated frames between nodes) is accepted.

// Default node-level orthonormality tolerance for state acceptance.
inline constexpr double kOrthoTol = 1e-10;

struct StrainPair {
  Vec3 gamma;  // shear / dilatation, R(d)^T phi_s
  Vec3 kappa;  // curvature / torsion
};

Mat3 skew(const Vec3& a);

// Columns are d1, d2, d3.
Mat3 rotation_matrix(const Vec9& d);

// Block-diagonal stack of the tangent: tangent_stack(u)^T d = rotation_matrix(d)^T u.
Mat93 tangent_stack(const Vec3& u);

// Maps director derivatives to curvature: kappa = curvature_map(d_s) d = -curvature_map(d) d_s.
Mat39 curvature_map(const Vec9& d);

// Connects director rates to angular velocity: w = angular_velocity_map(d)^T d_dot
// for orthonormal d.
Mat93 angular_velocity_map(const Vec9& d);

// Six orthonormality residuals 1/2 (d_i . d_j - delta_ij) in the index order
// (1,1), (2,2), (3,3), (1,2), (2,3), (3,1).
Vec6 orthonormality_residual(const Vec9& d);

// Gradient of orthonormality_residual with respect to d.
Mat69 orthonormality_gradient(const Vec9& d);

StrainPair strain_measures(const Vec9& d, const Vec9& d_s, const Vec3& phi_s);

// --------------------------------------------------------------------------
// Bilinear-swap helpers. Each structure block is bilinear in (state, costate);
// these give the "other" factor as a matrix so Newton gradients reuse the
// same element loops.
// --------------------------------------------------------------------------

// director_combination(f) d = rotation_matrix(d) f = sum_i f_i d_i.
Mat39 director_combination(const Vec3& f);

// curvature_weighted(m) x = curvature_map(x)^T m.
Mat99 curvature_weighted(const Vec3& m);

// orthonormality_hessian(lambda) = d/dd [orthonormality_gradient(d)^T lambda].
Mat99 orthonormality_hessian(const Vec6& lambda);

// angular_velocity_weighted(m) d = angular_velocity_map(d) m.
Mat99 angular_velocity_weighted(const Vec3& m);

// Frame with d3 aligned to `axis` via the minimal rotation taking e3 to axis.
Vec9 frame_from_axis(const Vec3& axis);

bool frame_is_orthonormal(const Vec9& d, double tol = kOrthoTol);

}  // namespace phrod

#endif
