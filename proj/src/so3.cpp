#include "sesim/so3.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace sesim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSeriesTheta = 1e-4;

double clamp1(double v) { return std::min(1.0, std::max(-1.0, v)); }

}  // namespace

Mat3 hat(const Vec3& w) {
  Mat3 a;
  a << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return a;
}

Vec3 vee(const Mat3& a) {
  if ((a + a.transpose()).norm() > 1e-9) {
    throw NotSkew("vee: matrix is not skew-symmetric within 1e-9");
  }
  return {a(2, 1), a(0, 2), a(1, 0)};
}

Vec3 skew_part_vee(const Mat3& a) {
  return {0.5 * (a(2, 1) - a(1, 2)), 0.5 * (a(0, 2) - a(2, 0)),
          0.5 * (a(1, 0) - a(0, 1))};
}

double sinc(double x) {
  if (std::abs(x) < kSeriesTheta) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0;
  }
  return std::sin(x) / x;
}

Mat3 exp_so3(const Vec3& x) {
  const double th = x.norm();
  const Mat3 k = hat(x);
  // (1 - cos th)/th^2 = sinc(th/2)^2 / 2, which needs no series of its own.
  const double half = sinc(0.5 * th);
  return Mat3::Identity() + sinc(th) * k + (0.5 * half * half) * (k * k);
}

Vec3 log_so3(const Mat3& r) {
  const double tr = r.trace();
  if (tr <= -1.0 + 1e-11) {
    throw AntipodalRotation("log_so3: rotation too close to a half-turn");
  }
  // The skew part carries sin(theta) times the axis. Recovering theta from
  // atan2 of (sin, cos) instead of acos(cos) keeps the angle accurate near
  // the half-turn, and dividing by the same sin keeps the axis consistent.
  const Vec3 w = skew_part_vee(r);
  const double s = w.norm();
  if (s == 0.0) return Vec3::Zero();
  return w * (std::atan2(s, 0.5 * (tr - 1.0)) / s);
}

double geodesic_distance(const Mat3& a, const Mat3& b) {
  return std::acos(clamp1(0.5 * ((a.transpose() * b).trace() - 1.0)));
}

bool is_rotation(const Mat3& r, double tol) {
  return (r.transpose() * r - Mat3::Identity()).norm() <= tol &&
         r.determinant() > 0.0;
}

void require_rotation(const Mat3& r, double tol) {
  if (!is_rotation(r, tol)) {
    throw NotOrthonormal("matrix is not orthonormal with positive determinant");
  }
}

Mat3 project_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  Vec3 s(1.0, 1.0, (u * v.transpose()).determinant() > 0 ? 1.0 : -1.0);
  return u * s.asDiagonal() * v.transpose();
}

double Parameterization::injectivity_radius() const {
  return kind_ == ParamKind::SinMap ? 0.5 * kPi : kPi;
}

double Parameterization::image_radius() const {
  switch (kind_) {
    case ParamKind::AxisAngle:
      return kPi;
    case ParamKind::Rodrigues:
      return std::numeric_limits<double>::infinity();
    default:
      return 1.0;  // tan(pi/4), sin(pi/2), sin(pi/2) all peak at one
  }
}

double Parameterization::g(double theta) const {
  switch (kind_) {
    case ParamKind::AxisAngle:
      return theta;
    case ParamKind::Rodrigues:
      return std::tan(0.5 * theta);
    case ParamKind::ModifiedRodrigues:
      return std::tan(0.25 * theta);
    case ParamKind::SinMap:
      return std::sin(theta);
    case ParamKind::QuatVec:
      return std::sin(0.5 * theta);
  }
  return theta;
}

double Parameterization::g_inverse(double y) const {
  switch (kind_) {
    case ParamKind::AxisAngle:
      return y;
    case ParamKind::Rodrigues:
      return 2.0 * std::atan(y);
    case ParamKind::ModifiedRodrigues:
      return 4.0 * std::atan(y);
    case ParamKind::SinMap:
      return std::asin(y);
    case ParamKind::QuatVec:
      return 2.0 * std::asin(y);
  }
  return y;
}

double Parameterization::g_prime(double theta) const {
  switch (kind_) {
    case ParamKind::AxisAngle:
      return 1.0;
    case ParamKind::Rodrigues: {
      const double t = std::tan(0.5 * theta);
      return 0.5 * (1.0 + t * t);
    }
    case ParamKind::ModifiedRodrigues: {
      const double t = std::tan(0.25 * theta);
      return 0.25 * (1.0 + t * t);
    }
    case ParamKind::SinMap:
      return std::cos(theta);
    case ParamKind::QuatVec:
      return 0.5 * std::cos(0.5 * theta);
  }
  return 1.0;
}

double Parameterization::g_over_theta(double theta) const {
  const double t2 = theta * theta;
  if (std::abs(theta) < kSeriesTheta) {
    switch (kind_) {
      case ParamKind::AxisAngle:
        return 1.0;
      case ParamKind::Rodrigues:
        return 0.5 + t2 / 24.0 + t2 * t2 / 240.0;
      case ParamKind::ModifiedRodrigues:
        return 0.25 + t2 / 192.0 + t2 * t2 / 7680.0;
      case ParamKind::SinMap:
        return sinc(theta);
      case ParamKind::QuatVec:
        return 0.5 * sinc(0.5 * theta);
    }
  }
  return g(theta) / theta;
}

std::string_view Parameterization::name() const {
  switch (kind_) {
    case ParamKind::AxisAngle:
      return "axis_angle";
    case ParamKind::Rodrigues:
      return "rodrigues";
    case ParamKind::ModifiedRodrigues:
      return "mrp";
    case ParamKind::SinMap:
      return "sin_map";
    case ParamKind::QuatVec:
      return "quat_vec";
  }
  return "axis_angle";
}

Parameterization Parameterization::parse(std::string_view tag) {
  for (ParamKind kind : all()) {
    if (Parameterization(kind).name() == tag) return Parameterization(kind);
  }
  throw ConfigInvalid("unknown parameterization tag '" + std::string(tag) +
                      "' (expected axis_angle, rodrigues, mrp, sin_map, quat_vec)");
}

const std::array<ParamKind, 5>& Parameterization::all() {
  static const std::array<ParamKind, 5> kinds = {
      ParamKind::AxisAngle, ParamKind::Rodrigues, ParamKind::ModifiedRodrigues,
      ParamKind::SinMap, ParamKind::QuatVec};
  return kinds;
}

Vec3 to_param(const Mat3& r, const Parameterization& p) {
  const Vec3 x = log_so3(r);
  const double th = x.norm();
  if (th >= p.injectivity_radius()) {
    throw OutsideInjectivityRegion("to_param: rotation at or beyond the injectivity radius");
  }
  return p.g_over_theta(th) * x;
}

Mat3 from_param(const Vec3& y, const Parameterization& p) {
  const double n = y.norm();
  if (n >= p.image_radius()) {
    throw OutsideImage("from_param: ||y|| at or beyond the image radius");
  }
  if (n == 0.0) return Mat3::Identity();
  return exp_so3((p.g_inverse(n) / n) * y);
}

Vec3 relative_param(const Vec3& xi, const Vec3& xj, const Parameterization& p) {
  return to_param(exp_so3(xi).transpose() * exp_so3(xj), p);
}

namespace {

/// Coefficient of hat(u)^2 in the inverse right Jacobian,
/// c(theta) = 1 - (theta/2) cot(theta/2), with its series below 1e-4.
double jac_c(double th) {
  if (th < kSeriesTheta) {
    const double t2 = th * th;
    return t2 / 12.0 + t2 * t2 / 720.0 + t2 * t2 * t2 / 30240.0;
  }
  return 1.0 - 0.5 * th * std::cos(0.5 * th) / std::sin(0.5 * th);
}

}  // namespace

Mat3 axis_angle_jacobian(const Vec3& x) {
  const double th = x.norm();
  if (th >= 2.0 * kPi) {
    throw NearSingular("axis_angle_jacobian: ||x|| must be below 2 pi");
  }
  const Mat3 k = hat(x);
  if (th == 0.0) return Mat3::Identity();
  return Mat3::Identity() + 0.5 * k + (jac_c(th) / (th * th)) * (k * k);
}

namespace {

struct ParamJacParts {
  double theta;
  double gp;      // g'(theta), the axis-direction gain
  double radial;  // g/theta, the in-plane gain of the outer factor
  double splane;  // in-plane singular value of the axis-angle jacobian
};

ParamJacParts param_jacobian_parts(const Vec3& y, const Parameterization& p) {
  const double n = y.norm();
  if (n >= p.image_radius()) {
    throw OutsideImage("param_jacobian: ||y|| at or beyond the image radius");
  }
  ParamJacParts parts;
  parts.theta = p.g_inverse(n);
  parts.gp = p.g_prime(parts.theta);
  parts.radial = p.g_over_theta(parts.theta);
  const double c = jac_c(parts.theta);
  parts.splane = std::hypot(1.0 - c, 0.5 * parts.theta);
  return parts;
}

}  // namespace

double param_jacobian_condition(const Vec3& y, const Parameterization& p) {
  // Both factors are block diagonal in the axis frame: the outer factor is
  // diag(g', g/theta, g/theta) and the inner one acts as 1 on the axis and as
  // a scaled plane rotation with singular value splane. The products g' and
  // (g/theta) splane are therefore the exact singular values.
  const ParamJacParts parts = param_jacobian_parts(y, p);
  const double a = std::abs(parts.gp);
  const double b = std::abs(parts.radial * parts.splane);
  if (std::min(a, b) == 0.0) return std::numeric_limits<double>::infinity();
  return std::max(a, b) / std::min(a, b);
}

Mat3 param_jacobian(const Vec3& y, const Parameterization& p) {
  const ParamJacParts parts = param_jacobian_parts(y, p);
  if (!(param_jacobian_condition(y, p) <= 1e8)) {
    throw NearSingular("param_jacobian: condition number exceeds 1e8");
  }
  const double n = y.norm();
  if (n == 0.0) return parts.gp * Mat3::Identity();
  const Vec3 u = y / n;
  const Mat3 outer = parts.gp * (u * u.transpose()) +
                     parts.radial * (Mat3::Identity() - u * u.transpose());
  return outer * axis_angle_jacobian(parts.theta * u);
}

Mat3 sample_rotation_ball(double radius, Rng& rng) {
  if (!(radius > 0.0) || radius > kPi) {
    throw ConfigInvalid("sample_rotation_ball: radius must lie in (0, pi]");
  }
  // Invert the CDF of the Haar angle density (1 - cos t) by bisection.
  const double target = rng.uniform() * (radius - std::sin(radius));
  double lo = 0.0, hi = radius;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    ((mid - std::sin(mid)) < target ? lo : hi) = mid;
  }
  return exp_so3((0.5 * (lo + hi)) * rng.unit_vector());
}

}  // namespace sesim
