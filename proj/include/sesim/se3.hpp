#pragma once

/// \file se3.hpp
/// Rigid transformations: poses, twists, the SE(3) exponential used for exact
/// zero-order-hold steps, twist conjugation by a fixed pose, and formation
/// target bookkeeping.

#include "sesim/so3.hpp"
#include "sesim/types.hpp"

#include <vector>

namespace sesim {

/// Homogeneous transformation, stored as rotation block plus translation.
struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 T = Vec3::Zero();
};

/// Body-frame velocity pair: Gdot = G hat(xi).
struct Twist {
  Vec3 omega = Vec3::Zero();
  Vec3 v = Vec3::Zero();
};

Mat4 pose_matrix(const Pose& g);
/// Validates the rotation block and the (0,0,0,1) bottom row.
Pose pose_from_matrix(const Mat4& m);

Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& g);

/// 4x4 twist matrix [hat(omega), v; 0, 0].
Mat4 twist_hat(const Twist& xi);
Twist twist_vee(const Mat4& m);

/// Left Jacobian of the rotation exponential (the translation mixing block
/// of the SE(3) exponential), series-guarded near zero.
Mat3 left_jacobian_so3(const Vec3& w);

/// exp of twist_hat(xi).
Pose exp_se3(const Twist& xi);

/// Exact flow of Gdot = G hat(xi) over a step of length h (ZOH step).
Pose step_constant_twist(const Pose& g, const Twist& xi, double h);

/// Adjoint map: conjugate_twist(xi, g) is the twist with
/// hat(result) = pose_matrix(g) hat(xi) pose_matrix(g)^-1.
Twist conjugate_twist(const Twist& xi, const Pose& g);
/// Inverse of conjugate_twist with the same g.
Twist deconjugate_twist(const Twist& xi, const Pose& g);

/// Per-agent target poses for formation mode. When disabled the target list
/// is ignored and consensus is run on the raw poses.
struct FormationSpec {
  bool enabled = false;
  std::vector<Pose> targets;
};

/// Throws ConfigInvalid when enabled with the wrong agent count and
/// NotOrthonormal when a target rotation block is invalid.
void validate_formation(const FormationSpec& spec, int n_agents);

/// Relative targets derived from absolute ones close under composition:
/// (Gi* Gj*^-1)(Gj* Gk*^-1) = Gi* Gk*^-1 for all triples within tol.
bool formation_targets_consistent(const FormationSpec& spec, double tol);

/// Error pose G target^-1 whose consensus encodes the formation.
Pose tilde_pose(const Pose& g, const Pose& target);

}  // namespace sesim
