#pragma once

/// \file controllers.hpp
/// The agent-level control laws.
///
/// Measurement convention: every per-agent law receives vectors indexed by
/// agent id. Entry i is the agent's own exact state; neighbor entries hold
/// what the agent measured (callers inject noise before the call). Entries
/// outside the neighborhood are never read. Relative inputs are expressed in
/// the calling agent's body frame ("rel_x[j]" is the measurement of j relative
/// to i), with rel entries at j = i equal to the identity/zero.
///
/// Output convention: kinematic laws return body twists (applied through the
/// right action), torque laws return body-frame torques, the force law a
/// body-frame force.

#include "sesim/se3.hpp"
#include "sesim/so3.hpp"
#include "sesim/topology.hpp"
#include "sesim/types.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace sesim {

/// The implemented control laws. "first" laws act on whole pose matrices;
/// "rot"/"trans" laws are kinematic single-quantity laws; "torque"/"force"
/// are the dynamic-level laws. "_abs" uses absolute measurements, "_rel"
/// relative ones, "_fl" is the feedback-linearized variant.
enum class LawTag {
  FirstAbs,
  FirstRel,
  RotAbs,
  RotRel,
  RotFl,
  TransAbs,
  TransRel,
  TorqueAbs,
  TorqueRel,
  Force,
};

/// Stable config tags: first_abs, first_rel, rot_abs, rot_rel, rot_fl,
/// trans_abs, trans_rel, torque_abs, torque_rel, force.
LawTag parse_law_tag(std::string_view tag);  ///< Throws ConfigInvalid.
std::string_view law_tag_name(LawTag t);
const std::array<LawTag, 10>& all_law_tags();

/// True for the torque and force laws (second-order closed loop).
bool law_is_dynamic(LawTag t);
bool law_moves_rotation(LawTag t);
bool law_moves_translation(LawTag t);
/// True when the law consumes relative (body-frame) measurements.
bool law_uses_relative(LawTag t);

/// First-order pose law, absolute form:
///   u_i = sum_j a_ij ((G_j - G_i) + (G_i^-1 - G_j^-1)).
/// Defined for any poses; the rotation block is exactly skew.
Mat4 first_order_absolute(const std::vector<Pose>& seen, int i, const Digraph& g);

/// First-order pose law, relative form: u_i = sum_j a_ij (G_ij - G_ij^-1).
Mat4 first_order_relative(const std::vector<Pose>& rel, int i, const Digraph& g);

/// Twist read-off from a first-order law output: the angular part is
/// vee((B - B^T)/2) / 2 of the rotation block B (half the skew part's axis),
/// the linear part is the translation column unscaled.
Twist extract_twist(const Mat4& u);

/// Kinematic attitude law, absolute coordinates:
///   w_i = sum_j a_ij (y_j - y_i).
Vec3 attitude_absolute(const std::vector<Mat3>& seen, int i, const Digraph& g,
                       const Parameterization& p);

/// Kinematic attitude law, relative coordinates: w_i = sum_j a_ij y_ij.
Vec3 attitude_relative(const std::vector<Mat3>& rel, int i, const Digraph& g,
                       const Parameterization& p);

/// Feedback-linearized attitude law: w_i = L_{y_i}^{-1} sum_j a_ij (y_j - y_i),
/// which turns the coordinate dynamics into exact linear consensus.
Vec3 attitude_linearizing(const std::vector<Mat3>& seen, int i, const Digraph& g,
                          const Parameterization& p);

/// Kinematic position law, absolute positions:
///   v_i = sum_j a_ij (T_j - T_i),
/// applied as a body velocity without attitude correction. Attitude-blind by
/// design: the realized world motion is R_i v_i, which reverses the consensus
/// direction for some fixed attitudes (see the divergence preset).
Vec3 translation_absolute(const std::vector<Vec3>& seen, int i, const Digraph& g);

/// Kinematic position law, relative positions: v_i = sum_j a_ij T_ij.
Vec3 translation_relative(const std::vector<Vec3>& rel, int i, const Digraph& g);

/// Backstepping velocity error of the absolute torque law (axis-angle
/// coordinates x): omega_bar_i = w_i - sum_j a_ij (x_j - x_i).
Vec3 omega_bar_absolute(const std::vector<Mat3>& seen_r, const Vec3& w_i, int i,
                        const Digraph& g);

/// Inner bracket of the absolute torque law:
///   -x_i + sum_j a_ij (L_{x_j} w_j - L_{x_i} w_i - omega_bar_i),
/// where the self weight contributes to the damping term.
Vec3 torque_absolute_bracket(const std::vector<Mat3>& seen_r,
                             const std::vector<Vec3>& seen_w, int i, const Digraph& g);

/// Absolute-measurement attitude torque:
///   tau_i = J_i (bracket) + w_i^ J_i w_i.
/// Closed loop: d/dt omega_bar_i = -x_i - d_i omega_bar_i.
Vec3 torque_absolute(const std::vector<Mat3>& seen_r, const std::vector<Vec3>& seen_w,
                     int i, const Digraph& g, const Mat3& inertia);

/// Velocity error of the relative torque law:
///   omega_bar'_i = w_i - sum_j a_ij y_ij.
Vec3 omega_bar_relative(const std::vector<Mat3>& rel_r, const Vec3& w_i, int i,
                        const Digraph& g, const Parameterization& p);

/// Inner bracket of the relative torque law:
///   -k omega_bar'_i + sum_j a_ij L_{-y_ij} w_ij,
/// with w_ij = R_ij w_j - w_i the measured relative angular velocity.
Vec3 torque_relative_bracket(const std::vector<Mat3>& rel_r,
                             const std::vector<Vec3>& rel_w, const Vec3& w_i, int i,
                             const Digraph& g, const Parameterization& p, double gain);

/// Relative-measurement attitude torque: tau_i = J_i (bracket) + w_i^ J_i w_i.
/// Closed loop: d/dt omega_bar'_i = -k omega_bar'_i exactly.
Vec3 torque_relative(const std::vector<Mat3>& rel_r, const std::vector<Vec3>& rel_w,
                     const Vec3& w_i, int i, const Digraph& g, const Parameterization& p,
                     double gain, const Mat3& inertia);

/// Velocity error of the force law: vbar_i = v_i - sum_j a_ij T_ij.
Vec3 velocity_bar(const std::vector<Vec3>& rel_t, const Vec3& v_i, int i,
                  const Digraph& g);

/// Inner bracket of the force law:
///   -k vbar_i + sum_j a_ij (u_ij - w_i^ T_ij) + w_i^ v_i,
/// with u_ij = R_i^T (R_j v_j - R_i v_i) the measured relative velocity.
Vec3 force_bracket(const std::vector<Vec3>& rel_t, const std::vector<Vec3>& rel_u,
                   const Vec3& w_i, const Vec3& v_i, int i, const Digraph& g,
                   double gain);

/// Translational force law: f_i = m_i (bracket).
/// Closed loop: d/dt vbar_i = -k vbar_i exactly.
Vec3 force_law(const std::vector<Vec3>& rel_t, const std::vector<Vec3>& rel_u,
               const Vec3& w_i, const Vec3& v_i, int i, const Digraph& g, double gain,
               double mass);

/// Formation retargeting of a torque-law bracket evaluated on shifted states
/// (G~ = G target^-1-composed, w~ = R* w):
///   tau_i = J_i R*^T (bracket~) + w_i^ J_i w_i,
/// which makes the shifted loop replicate the consensus loop exactly.
Vec3 formation_torque(const Vec3& bracket_tilde, const Pose& target, const Vec3& w_i,
                      const Mat3& inertia);

/// Formation retargeting of the force-law bracket evaluated on shifted states:
///   f_i = m_i R*^T (bracket~ + w~^ w~^ T* + w~dot^ T*),
/// where w~dot is the shifted angular acceleration realized by the applied
/// torque (zero when attitude is uncontrolled and w = 0).
Vec3 formation_force(const Vec3& bracket_tilde, const Pose& target, const Vec3& w_tilde,
                     const Vec3& w_tilde_dot, double mass);

}  // namespace sesim
