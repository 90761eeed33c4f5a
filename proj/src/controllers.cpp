#include "sesim/controllers.hpp"

#include <Eigen/LU>

#include <string>

namespace sesim {

namespace {

struct LawTagRow {
  LawTag tag;
  std::string_view name;
};

constexpr std::array<LawTagRow, 10> kLawTable = {{
    {LawTag::FirstAbs, "first_abs"},
    {LawTag::FirstRel, "first_rel"},
    {LawTag::RotAbs, "rot_abs"},
    {LawTag::RotRel, "rot_rel"},
    {LawTag::RotFl, "rot_fl"},
    {LawTag::TransAbs, "trans_abs"},
    {LawTag::TransRel, "trans_rel"},
    {LawTag::TorqueAbs, "torque_abs"},
    {LawTag::TorqueRel, "torque_rel"},
    {LawTag::Force, "force"},
}};

}  // namespace

LawTag parse_law_tag(std::string_view tag) {
  for (const LawTagRow& row : kLawTable) {
    if (row.name == tag) return row.tag;
  }
  throw ConfigInvalid("unknown law tag: " + std::string(tag));
}

std::string_view law_tag_name(LawTag t) {
  for (const LawTagRow& row : kLawTable) {
    if (row.tag == t) return row.name;
  }
  throw ConfigInvalid("unknown law tag value");
}

const std::array<LawTag, 10>& all_law_tags() {
  static const std::array<LawTag, 10> tags = [] {
    std::array<LawTag, 10> out{};
    for (size_t i = 0; i < kLawTable.size(); ++i) out[i] = kLawTable[i].tag;
    return out;
  }();
  return tags;
}

bool law_is_dynamic(LawTag t) {
  return t == LawTag::TorqueAbs || t == LawTag::TorqueRel || t == LawTag::Force;
}

bool law_moves_rotation(LawTag t) {
  switch (t) {
    case LawTag::FirstAbs:
    case LawTag::FirstRel:
    case LawTag::RotAbs:
    case LawTag::RotRel:
    case LawTag::RotFl:
    case LawTag::TorqueAbs:
    case LawTag::TorqueRel:
      return true;
    default:
      return false;
  }
}

bool law_moves_translation(LawTag t) {
  switch (t) {
    case LawTag::FirstAbs:
    case LawTag::FirstRel:
    case LawTag::TransAbs:
    case LawTag::TransRel:
    case LawTag::Force:
      return true;
    default:
      return false;
  }
}

bool law_uses_relative(LawTag t) {
  switch (t) {
    case LawTag::FirstRel:
    case LawTag::RotRel:
    case LawTag::TransRel:
    case LawTag::TorqueRel:
    case LawTag::Force:
      return true;
    default:
      return false;
  }
}

Mat4 first_order_absolute(const std::vector<Pose>& seen, int i, const Digraph& g) {
  const Mat4 gi = pose_matrix(seen[i]);
  const Mat4 gi_inv = pose_matrix(inverse(seen[i]));
  Mat4 u = Mat4::Zero();
  for (int j : g.neighbors(i)) {
    if (j == i) continue;
    const Mat4 gj = pose_matrix(seen[j]);
    const Mat4 gj_inv = pose_matrix(inverse(seen[j]));
    u += g.weights(i, j) * ((gj - gi) + (gi_inv - gj_inv));
  }
  return u;
}

Mat4 first_order_relative(const std::vector<Pose>& rel, int i, const Digraph& g) {
  Mat4 u = Mat4::Zero();
  for (int j : g.neighbors(i)) {
    if (j == i) continue;
    u += g.weights(i, j) * (pose_matrix(rel[j]) - pose_matrix(inverse(rel[j])));
  }
  return u;
}

Twist extract_twist(const Mat4& u) {
  const Mat3 b = u.topLeftCorner<3, 3>();
  return {vee(0.5 * (b - b.transpose())) / 2.0, u.topRightCorner<3, 1>()};
}

Vec3 attitude_absolute(const std::vector<Mat3>& seen, int i, const Digraph& g,
                       const Parameterization& p) {
  const Vec3 y_i = to_param(seen[i], p);
  Vec3 w = Vec3::Zero();
  for (int j : g.neighbors(i)) {
    if (j == i) continue;
    w += g.weights(i, j) * (to_param(seen[j], p) - y_i);
  }
  return w;
}

Vec3 attitude_relative(const std::vector<Mat3>& rel, int i, const Digraph& g,
                       const Parameterization& p) {
  Vec3 w = Vec3::Zero();
  for (int j : g.neighbors(i)) {
    if (j == i) continue;
    w += g.weights(i, j) * to_param(rel[j], p);
  }
  return w;
}

Vec3 attitude_linearizing(const std::vector<Mat3>& seen, int i, const Digraph& g,
                          const Parameterization& p) {
  const Vec3 u = attitude_absolute(seen, i, g, p);
  const Vec3 y_i = to_param(seen[i], p);
  return param_jacobian(y_i, p).partialPivLu().solve(u);
}

Vec3 translation_absolute(const std::vector<Vec3>& seen, int i, const Digraph& g) {
  Vec3 u = Vec3::Zero();
  for (int j : g.neighbors(i)) {
    if (j == i) continue;
    u += g.weights(i, j) * (seen[j] - seen[i]);
  }
  return u;
}

Vec3 translation_relative(const std::vector<Vec3>& rel, int i, const Digraph& g) {
  Vec3 v = Vec3::Zero();
  for (int j : g.neighbors(i)) {
    if (j == i) continue;
    v += g.weights(i, j) * rel[j];
  }
  return v;
}

Vec3 omega_bar_absolute(const std::vector<Mat3>& seen_r, const Vec3& w_i, int i,
                        const Digraph& g) {
  const Vec3 x_i = log_so3(seen_r[i]);
  Vec3 wbar = w_i;
  for (int j : g.neighbors(i)) {
    if (j == i) continue;
    wbar -= g.weights(i, j) * (log_so3(seen_r[j]) - x_i);
  }
  return wbar;
}

Vec3 torque_absolute_bracket(const std::vector<Mat3>& seen_r,
                             const std::vector<Vec3>& seen_w, int i, const Digraph& g) {
  const Vec3 x_i = log_so3(seen_r[i]);
  const Vec3 xdot_i = axis_angle_jacobian(x_i) * seen_w[i];
  const Vec3 wbar = omega_bar_absolute(seen_r, seen_w[i], i, g);
  Vec3 bracket = -x_i;
  for (int j : g.neighbors(i)) {
    const double w = g.weights(i, j);
    const Vec3 xdot_j =
        (j == i) ? xdot_i : Vec3(axis_angle_jacobian(log_so3(seen_r[j])) * seen_w[j]);
    bracket += w * (xdot_j - xdot_i - wbar);
  }
  return bracket;
}

Vec3 torque_absolute(const std::vector<Mat3>& seen_r, const std::vector<Vec3>& seen_w,
                     int i, const Digraph& g, const Mat3& inertia) {
  const Vec3 bracket = torque_absolute_bracket(seen_r, seen_w, i, g);
  return inertia * bracket + seen_w[i].cross(inertia * seen_w[i]);
}

Vec3 omega_bar_relative(const std::vector<Mat3>& rel_r, const Vec3& w_i, int i,
                        const Digraph& g, const Parameterization& p) {
  Vec3 wbar = w_i;
  for (int j : g.neighbors(i)) {
    if (j == i) continue;
    wbar -= g.weights(i, j) * to_param(rel_r[j], p);
  }
  return wbar;
}

Vec3 torque_relative_bracket(const std::vector<Mat3>& rel_r,
                             const std::vector<Vec3>& rel_w, const Vec3& w_i, int i,
                             const Digraph& g, const Parameterization& p, double gain) {
  Vec3 bracket = -gain * omega_bar_relative(rel_r, w_i, i, g, p);
  for (int j : g.neighbors(i)) {
    if (j == i) continue;
    const Vec3 y = to_param(rel_r[j], p);
    bracket += g.weights(i, j) * (param_jacobian(-y, p) * rel_w[j]);
  }
  return bracket;
}

Vec3 torque_relative(const std::vector<Mat3>& rel_r, const std::vector<Vec3>& rel_w,
                     const Vec3& w_i, int i, const Digraph& g, const Parameterization& p,
                     double gain, const Mat3& inertia) {
  const Vec3 bracket = torque_relative_bracket(rel_r, rel_w, w_i, i, g, p, gain);
  return inertia * bracket + w_i.cross(inertia * w_i);
}

Vec3 velocity_bar(const std::vector<Vec3>& rel_t, const Vec3& v_i, int i,
                  const Digraph& g) {
  Vec3 vbar = v_i;
  for (int j : g.neighbors(i)) {
    if (j == i) continue;
    vbar -= g.weights(i, j) * rel_t[j];
  }
  return vbar;
}

Vec3 force_bracket(const std::vector<Vec3>& rel_t, const std::vector<Vec3>& rel_u,
                   const Vec3& w_i, const Vec3& v_i, int i, const Digraph& g,
                   double gain) {
  Vec3 bracket = -gain * velocity_bar(rel_t, v_i, i, g) + w_i.cross(v_i);
  for (int j : g.neighbors(i)) {
    if (j == i) continue;
    bracket += g.weights(i, j) * (rel_u[j] - w_i.cross(rel_t[j]));
  }
  return bracket;
}

Vec3 force_law(const std::vector<Vec3>& rel_t, const std::vector<Vec3>& rel_u,
               const Vec3& w_i, const Vec3& v_i, int i, const Digraph& g, double gain,
               double mass) {
  return mass * force_bracket(rel_t, rel_u, w_i, v_i, i, g, gain);
}

Vec3 formation_torque(const Vec3& bracket_tilde, const Pose& target, const Vec3& w_i,
                      const Mat3& inertia) {
  return inertia * (target.R.transpose() * bracket_tilde) + w_i.cross(inertia * w_i);
}

Vec3 formation_force(const Vec3& bracket_tilde, const Pose& target, const Vec3& w_tilde,
                     const Vec3& w_tilde_dot, double mass) {
  const Vec3 shifted = bracket_tilde + w_tilde.cross(w_tilde.cross(target.T)) +
                       w_tilde_dot.cross(target.T);
  return mass * (target.R.transpose() * shifted);
}

}  // namespace sesim
