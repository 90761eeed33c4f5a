#pragma once

/// \file so3.hpp
/// Rotation-group kernel: hat/vee maps, exponential and logarithm, geodesic
/// distance, the family of vector coordinates y = g(theta) u used by the
/// attitude consensus laws, their kinematic Jacobians, and Haar-ball sampling.
///
/// Conventions. Rotations are plain 3x3 matrices (validated at boundaries
/// rather than wrapped, because noisy measurements are deliberately allowed
/// to leave the group). Body angular velocity omega acts on the right:
/// Rdot = R hat(omega). For x = log(R) the coordinate rate is
/// xdot = L(x) omega with L the inverse right Jacobian.

#include "sesim/rng.hpp"
#include "sesim/types.hpp"

#include <array>
#include <string_view>

namespace sesim {

/// hat(w) is the matrix with hat(w) b = w x b.
Mat3 hat(const Vec3& w);

/// Inverse of hat. Throws NotSkew if ||A + A^T||_F > 1e-9.
Vec3 vee(const Mat3& a);

/// vee of the skew part (A - A^T)/2; never throws.
Vec3 skew_part_vee(const Mat3& a);

/// sin(x)/x with a series branch below |x| = 1e-4 (absolute error <= 1e-15).
double sinc(double x);

/// Rodrigues formula, series-guarded near zero.
Mat3 exp_so3(const Vec3& x);

/// Principal logarithm, ||result|| = d(I, R) < pi. Throws AntipodalRotation
/// when trace(R) <= -1 + 1e-11, where the axis is no longer well determined.
Vec3 log_so3(const Mat3& r);

/// Geodesic (bi-invariant) distance acos((trace(a^T b) - 1)/2) in [0, pi].
double geodesic_distance(const Mat3& a, const Mat3& b);

/// True when ||R^T R - I||_F <= tol and det(R) > 0.
bool is_rotation(const Mat3& r, double tol = 1e-9);

/// Throws NotOrthonormal unless is_rotation(r, tol).
void require_rotation(const Mat3& r, double tol = 1e-9);

/// Nearest rotation in Frobenius norm (polar factor via SVD, det corrected).
Mat3 project_rotation(const Mat3& m);

/// The five supported vector coordinates y = g(theta) u on the rotation group.
enum class ParamKind {
  AxisAngle,         ///< g = theta
  Rodrigues,         ///< g = tan(theta/2)
  ModifiedRodrigues, ///< g = tan(theta/4)
  SinMap,            ///< g = sin(theta), i.e. y = vee(R - R^T)/2
  QuatVec,           ///< g = sin(theta/2), the quaternion vector part
};

/// Scalar profile of one coordinate family. Each map is injective on the ball
/// of radius r about the identity (r = pi/2 for the sin map, pi otherwise)
/// and its image is the open ball of radius r' = sup g.
class Parameterization {
 public:
  explicit Parameterization(ParamKind kind) : kind_(kind) {}

  ParamKind kind() const { return kind_; }
  double injectivity_radius() const;  ///< r
  double image_radius() const;        ///< r' (+inf for Rodrigues)

  double g(double theta) const;
  double g_inverse(double y) const;
  double g_prime(double theta) const;
  /// g(theta)/theta, continued through theta = 0 by series (used below 1e-4).
  double g_over_theta(double theta) const;

  /// Stable config tag: axis_angle, rodrigues, mrp, sin_map, quat_vec.
  std::string_view name() const;
  /// Inverse of name(). Throws ConfigInvalid on an unknown tag.
  static Parameterization parse(std::string_view tag);
  static const std::array<ParamKind, 5>& all();

 private:
  ParamKind kind_;
};

/// y = g(theta) u for R = exp(theta hat(u)). Requires d(I, R) < r, else
/// OutsideInjectivityRegion (the antipodal guard of log_so3 may fire first
/// for the families with r = pi).
Vec3 to_param(const Mat3& r, const Parameterization& p);

/// Inverse of to_param on the open image ball; throws OutsideImage when
/// ||y|| >= r'.
Mat3 from_param(const Vec3& y, const Parameterization& p);

/// Coordinates of the relative rotation exp(hat(xi))^T exp(hat(xj)).
/// Inputs are axis-angle vectors; requires the relative angle below r.
Vec3 relative_param(const Vec3& xi, const Vec3& xj, const Parameterization& p);

/// L(x) = I + (theta/2) hat(u) + (1 - sinc(theta)/sinc^2(theta/2)) hat(u)^2,
/// the inverse right Jacobian, invertible for ||x|| < 2 pi. The hat(u)^2
/// coefficient switches to its sixth-order series below theta = 1e-4.
Mat3 axis_angle_jacobian(const Vec3& x);

/// Jacobian L_y with ydot = L_y omega, computed as
/// [g'(theta) u u^T + (g/theta)(I - u u^T)] L(theta u). Throws OutsideImage
/// for y outside the image ball and NearSingular when the condition number
/// exceeds 1e8.
Mat3 param_jacobian(const Vec3& y, const Parameterization& p);

/// Exact condition number of param_jacobian (the factors are block diagonal
/// in the axis frame, so the singular values are available in closed form).
double param_jacobian_condition(const Vec3& y, const Parameterization& p);

/// Haar-uniform rotation conditioned on the geodesic ball of the given
/// radius (0 < radius <= pi): axis uniform on the sphere, angle with density
/// proportional to 1 - cos(theta), inverted by bisection.
Mat3 sample_rotation_ball(double radius, Rng& rng);

}  // namespace sesim
