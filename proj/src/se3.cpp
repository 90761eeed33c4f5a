#include "sesim/se3.hpp"

#include <cmath>

namespace sesim {

Mat4 pose_matrix(const Pose& g) {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = g.R;
  m.topRightCorner<3, 1>() = g.T;
  return m;
}

Pose pose_from_matrix(const Mat4& m) {
  if ((m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).norm() > 1e-12) {
    throw NotOrthonormal("pose_from_matrix: bottom row must be (0, 0, 0, 1)");
  }
  Pose g{m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
  require_rotation(g.R);
  return g;
}

Pose compose(const Pose& a, const Pose& b) {
  return {a.R * b.R, a.R * b.T + a.T};
}

Pose inverse(const Pose& g) {
  return {g.R.transpose(), -(g.R.transpose() * g.T)};
}

Mat4 twist_hat(const Twist& xi) {
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<3, 3>() = hat(xi.omega);
  m.topRightCorner<3, 1>() = xi.v;
  return m;
}

Twist twist_vee(const Mat4& m) {
  return {vee(m.topLeftCorner<3, 3>()), m.topRightCorner<3, 1>()};
}

Mat3 left_jacobian_so3(const Vec3& w) {
  const double th = w.norm();
  const Mat3 k = hat(w);
  // (1 - cos th)/th^2 via half-angle sinc, (th - sin th)/th^3 via series.
  const double half = sinc(0.5 * th);
  const double b2 = 0.5 * half * half;
  double b3;
  if (th < 1e-4) {
    const double t2 = th * th;
    b3 = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
  } else {
    b3 = (th - std::sin(th)) / (th * th * th);
  }
  return Mat3::Identity() + b2 * k + b3 * (k * k);
}

Pose exp_se3(const Twist& xi) {
  return {exp_so3(xi.omega), left_jacobian_so3(xi.omega) * xi.v};
}

Pose step_constant_twist(const Pose& g, const Twist& xi, double h) {
  return compose(g, exp_se3({h * xi.omega, h * xi.v}));
}

Twist conjugate_twist(const Twist& xi, const Pose& g) {
  const Vec3 w = g.R * xi.omega;
  return {w, g.T.cross(w) + g.R * xi.v};
}

Twist deconjugate_twist(const Twist& xi, const Pose& g) {
  return {g.R.transpose() * xi.omega,
          g.R.transpose() * (xi.omega.cross(g.T) + xi.v)};
}

void validate_formation(const FormationSpec& spec, int n_agents) {
  if (!spec.enabled) return;
  if (static_cast<int>(spec.targets.size()) != n_agents) {
    throw ConfigInvalid("formation.targets: expected one target pose per agent");
  }
  for (const Pose& target : spec.targets) require_rotation(target.R);
}

bool formation_targets_consistent(const FormationSpec& spec, double tol) {
  if (!spec.enabled) return true;
  const int n = static_cast<int>(spec.targets.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const Pose ij = compose(spec.targets[i], inverse(spec.targets[j]));
        const Pose jk = compose(spec.targets[j], inverse(spec.targets[k]));
        const Pose ik = compose(spec.targets[i], inverse(spec.targets[k]));
        if ((pose_matrix(compose(ij, jk)) - pose_matrix(ik)).norm() > tol) return false;
      }
    }
  }
  return true;
}

Pose tilde_pose(const Pose& g, const Pose& target) {
  return compose(g, inverse(target));
}

}  // namespace sesim
