#include "sesim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sesim {

namespace {

constexpr double kTimeSlop = 1e-12;
constexpr double kDivergenceNorm = 1e9;
constexpr int kReprojectEvery = 1000;

const Pose kIdentityPose{};

}  // namespace

LawSet parse_law_set(std::string_view spec) {
  if (spec == "free") return {};
  if (spec.empty()) throw ConfigInvalid("empty law spec");
  LawSet out;
  std::size_t start = 0;
  while (true) {
    const std::size_t plus = spec.find('+', start);
    const std::string_view part =
        spec.substr(start, plus == std::string_view::npos ? std::string_view::npos
                                                          : plus - start);
    if (part == "free")
      throw ConfigInvalid("'free' cannot be combined with control laws");
    const LawTag tag = parse_law_tag(part);
    if (law_moves_rotation(tag)) {
      if (out.rotation.has_value())
        throw ConfigInvalid("law spec '" + std::string(spec) +
                            "' selects two attitude laws");
      out.rotation = tag;
    }
    if (law_moves_translation(tag)) {
      if (out.translation.has_value())
        throw ConfigInvalid("law spec '" + std::string(spec) +
                            "' selects two position laws");
      out.translation = tag;
    }
    if (plus == std::string_view::npos) break;
    start = plus + 1;
  }
  validate_law_set(out);
  return out;
}

std::string law_set_name(const LawSet& laws) {
  if (!laws.rotation && !laws.translation) return "free";
  if (laws.rotation && laws.translation && *laws.rotation == *laws.translation)
    return std::string(law_tag_name(*laws.rotation));
  std::string out;
  if (laws.rotation) out = law_tag_name(*laws.rotation);
  if (laws.translation) {
    if (!out.empty()) out += '+';
    out += law_tag_name(*laws.translation);
  }
  return out;
}

bool law_set_is_dynamic(const LawSet& laws) {
  if (laws.rotation) return law_is_dynamic(*laws.rotation);
  if (laws.translation) return law_is_dynamic(*laws.translation);
  return true;  // free rigid body
}

void validate_law_set(const LawSet& laws) {
  if (!laws.rotation && !laws.translation) return;
  if (laws.rotation && laws.translation && *laws.rotation == *laws.translation) {
    if (!(law_moves_rotation(*laws.rotation) && law_moves_translation(*laws.rotation)))
      throw ConfigInvalid("law occupies both slots but moves only one quantity");
    return;
  }
  if (laws.rotation) {
    if (!law_moves_rotation(*laws.rotation))
      throw ConfigInvalid("rotation slot holds a position-only law");
    if (law_moves_translation(*laws.rotation))
      throw ConfigInvalid("a pose law must occupy both law slots");
  }
  if (laws.translation) {
    if (!law_moves_translation(*laws.translation))
      throw ConfigInvalid("translation slot holds an attitude-only law");
    if (law_moves_rotation(*laws.translation))
      throw ConfigInvalid("a pose law must occupy both law slots");
  }
  if (laws.rotation && laws.translation &&
      law_is_dynamic(*laws.rotation) != law_is_dynamic(*laws.translation))
    throw ConfigInvalid("cannot mix kinematic and dynamic laws in one trial");
}

void validate_trial_config(const TrialConfig& cfg) {
  if (cfg.n < 1) throw ConfigInvalid("agent count must be positive");
  validate_law_set(cfg.laws);
  const bool dynamic = law_set_is_dynamic(cfg.laws);

  if (!(cfg.horizon > 0.0)) throw ConfigInvalid("horizon must be positive");
  if (!(cfg.sample_rate > 0.0)) throw ConfigInvalid("sample rate must be positive");
  const double samples = cfg.horizon * cfg.sample_rate;
  if (std::round(samples) < 1.0 ||
      std::abs(samples - std::round(samples)) > 1e-9 * std::max(1.0, samples))
    throw ConfigInvalid("horizon must be a whole number of sample intervals");
  if (dynamic) {
    if (!(cfg.step > 0.0)) throw ConfigInvalid("integrator step must be positive");
    const double sub = 1.0 / (cfg.sample_rate * cfg.step);
    if (std::round(sub) < 1.0 ||
        std::abs(sub - std::round(sub)) > 1e-9 * std::max(1.0, sub))
      throw ConfigInvalid("sample interval must be a whole number of integrator steps");
  }
  if (cfg.noise < 0.0) throw ConfigInvalid("noise magnitude must be nonnegative");
  const bool uses_gain =
      cfg.laws.rotation == LawTag::TorqueRel || cfg.laws.translation == LawTag::Force;
  if (uses_gain && !(cfg.gain > 0.0)) throw ConfigInvalid("gain must be positive");

  const InitSpec& init = cfg.init;
  if (!init.explicit_states.empty()) {
    if (int(init.explicit_states.size()) != cfg.n)
      throw ConfigInvalid("explicit initial states must cover every agent");
    for (const AgentState& s : init.explicit_states) require_rotation(s.pose.R);
  } else {
    if (init.rotation == InitSpec::Rotation::Ball &&
        !(init.rotation_radius >= 0.0 && init.rotation_radius <= std::numbers::pi))
      throw ConfigInvalid("rotation ball radius must lie in [0, pi]");
    if (init.translation != InitSpec::Translation::Zero && init.box_size < 0.0)
      throw ConfigInvalid("box size must be nonnegative");
    if (!dynamic) {
      if (init.omega != InitSpec::Velocity::Zero ||
          init.velocity != InitSpec::Velocity::Zero)
        throw ConfigInvalid("kinematic trials carry no velocity state");
    } else {
      if (init.omega_radius < 0.0 || init.velocity_radius < 0.0)
        throw ConfigInvalid("velocity radii must be nonnegative");
      if (init.omega == InitSpec::Velocity::ErrorBall &&
          !(cfg.laws.rotation == LawTag::TorqueAbs ||
            cfg.laws.rotation == LawTag::TorqueRel))
        throw ConfigInvalid("an omega error ball needs a torque law to center on");
      if (init.velocity == InitSpec::Velocity::ErrorBall &&
          cfg.laws.translation != LawTag::Force)
        throw ConfigInvalid("a velocity error ball needs the force law to center on");
    }
  }

  if (!cfg.phys.empty() && cfg.phys.size() != 1 && int(cfg.phys.size()) != cfg.n)
    throw ConfigInvalid("phys list must be empty, one shared entry, or per-agent");
  for (const AgentPhys& ph : cfg.phys) {
    if (!(ph.mass > 0.0)) throw ConfigInvalid("mass must be positive");
    if ((ph.inertia - ph.inertia.transpose()).norm() >
        1e-12 * std::max(1.0, ph.inertia.norm()))
      throw ConfigInvalid("inertia must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat3> es(ph.inertia);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw ConfigInvalid("inertia must be positive definite");
  }

  validate_formation(cfg.formation, cfg.n);

  switch (cfg.schedule.kind) {
    case ScheduleSpec::Kind::Fixed:
      validate_digraph(cfg.schedule.fixed);
      if (cfg.schedule.fixed.n != cfg.n)
        throw ConfigInvalid("fixed graph does not match the agent count");
      break;
    case ScheduleSpec::Kind::Explicit: {
      const SwitchingSchedule& s = cfg.schedule.explicit_schedule;
      if (s.n() != cfg.n)
        throw ConfigInvalid("explicit schedule does not match the agent count");
      if (std::abs(s.t0()) > kTimeSlop)
        throw ConfigInvalid("explicit schedule must start at time zero");
      if (s.horizon() < cfg.horizon - kTimeSlop)
        throw ConfigInvalid("explicit schedule ends before the trial horizon");
      break;
    }
    case ScheduleSpec::Kind::RandomConstant:
      break;
    case ScheduleSpec::Kind::RandomSwitching:
      if (!(cfg.schedule.period > 0.0))
        throw ConfigInvalid("switching period must be positive");
      break;
    case ScheduleSpec::Kind::Alternating:
      if (cfg.schedule.graphs.empty())
        throw ConfigInvalid("alternating schedule needs at least one graph");
      if (!(cfg.schedule.period > 0.0))
        throw ConfigInvalid("switching period must be positive");
      for (const Digraph& g : cfg.schedule.graphs) {
        validate_digraph(g);
        if (g.n != cfg.n)
          throw ConfigInvalid("alternating graph does not match the agent count");
      }
      break;
    case ScheduleSpec::Kind::Disconnected:
      if (cfg.n < 2)
        throw ConfigInvalid("the disconnected control needs at least two agents");
      break;
  }
}

const Digraph& GraphTimeline::at(double t) const {
  if (times.empty()) throw ConfigInvalid("empty graph timeline");
  auto it = std::upper_bound(times.begin(), times.end(), t + kTimeSlop);
  const std::size_t idx = it == times.begin() ? 0 : std::size_t(it - times.begin()) - 1;
  return graphs[idx];
}

Digraph GraphTimeline::union_over(double t1, double t2) const {
  auto it = std::upper_bound(times.begin(), times.end(), t1 + kTimeSlop);
  const std::size_t idx = it == times.begin() ? 0 : std::size_t(it - times.begin()) - 1;
  Digraph u = graphs[idx];
  for (std::size_t k = idx + 1; k < times.size() && times[k] < t2 - kTimeSlop; ++k)
    u = union_graphs(u, graphs[k]);
  return u;
}

namespace {

GraphTimeline realize_timeline(const TrialConfig& cfg, Rng& rng) {
  GraphTimeline tl;
  switch (cfg.schedule.kind) {
    case ScheduleSpec::Kind::Fixed:
      tl.times = {0.0};
      tl.graphs = {cfg.schedule.fixed};
      break;
    case ScheduleSpec::Kind::Explicit: {
      const SwitchingSchedule& s = cfg.schedule.explicit_schedule;
      tl.times = s.switch_times();
      for (double t : tl.times) tl.graphs.push_back(s.graph_at(t));
      break;
    }
    case ScheduleSpec::Kind::RandomConstant:
      tl.times = {0.0};
      tl.graphs = {random_qsc_graph(cfg.n, rng)};
      break;
    case ScheduleSpec::Kind::RandomSwitching:
    case ScheduleSpec::Kind::Alternating: {
      const double period = cfg.schedule.period;
      for (int k = 0; k * period < cfg.horizon - kTimeSlop; ++k) {
        tl.times.push_back(k * period);
        if (cfg.schedule.kind == ScheduleSpec::Kind::RandomSwitching)
          tl.graphs.push_back(random_qsc_graph(cfg.n, rng));
        else
          tl.graphs.push_back(cfg.schedule.graphs[k % cfg.schedule.graphs.size()]);
      }
      break;
    }
    case ScheduleSpec::Kind::Disconnected: {
      const int half = cfg.n / 2;
      MatX w = MatX::Zero(cfg.n, cfg.n);
      for (int i = 0; i < cfg.n; ++i)
        for (int j = 0; j < cfg.n; ++j)
          if ((i < half) == (j < half)) w(i, j) = 1.0;
      tl.times = {0.0};
      tl.graphs = {Digraph{cfg.n, std::move(w)}};
      break;
    }
  }
  return tl;
}

std::vector<AgentPhys> expand_phys(const TrialConfig& cfg) {
  if (cfg.phys.empty()) return std::vector<AgentPhys>(cfg.n);
  if (cfg.phys.size() == 1) return std::vector<AgentPhys>(cfg.n, cfg.phys[0]);
  return cfg.phys;
}

const Pose& target_of(const TrialConfig& cfg, int i) {
  return cfg.formation.enabled ? cfg.formation.targets[i] : kIdentityPose;
}

/// Backstepping-error center for the omega error ball, in the shifted frame.
Vec3 omega_center_tilde(const TrialConfig& cfg, const Digraph& g,
                        const std::vector<AgentState>& st, int i) {
  if (cfg.laws.rotation == LawTag::TorqueAbs) {
    std::vector<Mat3> seen(cfg.n, Mat3::Identity());
    for (int j : g.neighbors(i)) seen[j] = tilde_pose(st[j].pose, target_of(cfg, j)).R;
    return -omega_bar_absolute(seen, Vec3::Zero(), i, g);
  }
  const Mat3 ri = tilde_pose(st[i].pose, target_of(cfg, i)).R;
  std::vector<Mat3> rel(cfg.n, Mat3::Identity());
  for (int j : g.neighbors(i))
    rel[j] = ri.transpose() * tilde_pose(st[j].pose, target_of(cfg, j)).R;
  return -omega_bar_relative(rel, Vec3::Zero(), i, g, Parameterization(cfg.param));
}

/// Velocity-error center for the force law, in the shifted frame.
Vec3 velocity_center_tilde(const TrialConfig& cfg, const Digraph& g,
                           const std::vector<AgentState>& st, int i) {
  const Pose pi = tilde_pose(st[i].pose, target_of(cfg, i));
  std::vector<Vec3> rel_t(cfg.n, Vec3::Zero());
  for (int j : g.neighbors(i)) {
    const Pose pj = tilde_pose(st[j].pose, target_of(cfg, j));
    rel_t[j] = pi.R.transpose() * (pj.T - pi.T);
  }
  return -velocity_bar(rel_t, Vec3::Zero(), i, g);
}

std::vector<AgentState> realize_init(const TrialConfig& cfg, const GraphTimeline& tl,
                                     Rng& rng) {
  if (!cfg.init.explicit_states.empty()) return cfg.init.explicit_states;

  std::vector<AgentState> st(cfg.n);
  const InitSpec& init = cfg.init;
  for (AgentState& s : st) {
    switch (init.rotation) {
      case InitSpec::Rotation::Identity:
        break;
      case InitSpec::Rotation::Ball:
        s.pose.R = sample_rotation_ball(init.rotation_radius, rng);
        break;
      case InitSpec::Rotation::FixedFlipZ:
        s.pose.R = Vec3(-1.0, -1.0, 1.0).asDiagonal();
        break;
    }
    switch (init.translation) {
      case InitSpec::Translation::Zero:
        break;
      case InitSpec::Translation::Box:
        s.pose.T = Vec3(rng.uniform(0.0, init.box_size),
                        rng.uniform(0.0, init.box_size),
                        rng.uniform(0.0, init.box_size));
        break;
      case InitSpec::Translation::PlanarBox:
        s.pose.T =
            Vec3(rng.uniform(0.0, init.box_size), rng.uniform(0.0, init.box_size), 0.0);
        break;
    }
  }
  if (!law_set_is_dynamic(cfg.laws)) return st;

  const Digraph& g0 = tl.at(0.0);
  for (int i = 0; i < cfg.n; ++i) {
    AgentState& s = st[i];
    const Pose& tgt = target_of(cfg, i);
    switch (init.omega) {
      case InitSpec::Velocity::Zero:
        break;
      case InitSpec::Velocity::Ball:
        s.omega = rng.ball(init.omega_radius);
        break;
      case InitSpec::Velocity::ErrorBall:
        s.omega = tgt.R.transpose() *
                  (omega_center_tilde(cfg, g0, st, i) + rng.ball(init.omega_radius));
        break;
    }
    switch (init.velocity) {
      case InitSpec::Velocity::Zero:
        break;
      case InitSpec::Velocity::Ball:
        s.v = rng.ball(init.velocity_radius);
        break;
      case InitSpec::Velocity::ErrorBall: {
        const Vec3 v_tilde =
            velocity_center_tilde(cfg, g0, st, i) + rng.ball(init.velocity_radius);
        const Vec3 w_tilde = tgt.R * s.omega;
        s.v = tgt.R.transpose() * (v_tilde - tgt.T.cross(w_tilde));
        break;
      }
    }
  }
  return st;
}

/// One step's measurement perturbations; entry [i][j] is what agent i adds to
/// its view of j. Rotation entries perturb multiplicatively through exp.
struct NoiseTable {
  bool active = false;
  std::vector<std::vector<Vec3>> rot, pos, wvec, vvec;
};

NoiseTable draw_noise(const Digraph& g, double mag, Rng& rng) {
  NoiseTable nt;
  if (mag <= 0.0) return nt;
  nt.active = true;
  nt.rot.assign(g.n, std::vector<Vec3>(g.n, Vec3::Zero()));
  nt.pos.assign(g.n, std::vector<Vec3>(g.n, Vec3::Zero()));
  nt.wvec.assign(g.n, std::vector<Vec3>(g.n, Vec3::Zero()));
  nt.vvec.assign(g.n, std::vector<Vec3>(g.n, Vec3::Zero()));
  const double rot_scale = mag / std::numbers::sqrt2;
  for (int i = 0; i < g.n; ++i)
    for (int j : g.neighbors(i)) {
      if (j == i) continue;
      nt.rot[i][j] = rot_scale * rng.unit_vector();
      nt.pos[i][j] = mag * rng.unit_vector();
      nt.wvec[i][j] = mag * rng.unit_vector();
      nt.vvec[i][j] = mag * rng.unit_vector();
    }
  return nt;
}

struct ControlSet {
  std::vector<Twist> kin;  ///< commanded twists, real frame (kinematic laws)
  std::vector<Vec3> tau, f;
};

/// Evaluates the configured laws on the current states. Formation mode shifts
/// every measurement into the tilde variables and maps outputs back.
ControlSet compute_all(const TrialConfig& cfg, const std::vector<AgentPhys>& phys,
                       const Digraph& g, const std::vector<AgentState>& st,
                       const NoiseTable& nt) {
  const int n = cfg.n;
  const bool formation = cfg.formation.enabled;

  std::vector<Pose> wp(n);
  std::vector<Vec3> ww(n), wv(n);
  for (int i = 0; i < n; ++i) {
    if (formation) {
      wp[i] = tilde_pose(st[i].pose, target_of(cfg, i));
      const Twist tw = conjugate_twist({st[i].omega, st[i].v}, target_of(cfg, i));
      ww[i] = tw.omega;
      wv[i] = tw.v;
    } else {
      wp[i] = st[i].pose;
      ww[i] = st[i].omega;
      wv[i] = st[i].v;
    }
  }

  auto seen_poses = [&](int i) {
    std::vector<Pose> out(n);
    for (int j : g.neighbors(i)) {
      out[j] = wp[j];
      if (nt.active && j != i) {
        out[j].R = wp[j].R * exp_so3(nt.rot[i][j]);
        out[j].T += nt.pos[i][j];
      }
    }
    return out;
  };
  auto seen_rots = [&](int i) {
    std::vector<Mat3> out(n, Mat3::Identity());
    for (int j : g.neighbors(i)) {
      out[j] = wp[j].R;
      if (nt.active && j != i) out[j] *= exp_so3(nt.rot[i][j]);
    }
    return out;
  };
  auto seen_ts = [&](int i) {
    std::vector<Vec3> out(n, Vec3::Zero());
    for (int j : g.neighbors(i)) {
      out[j] = wp[j].T;
      if (nt.active && j != i) out[j] += nt.pos[i][j];
    }
    return out;
  };
  auto seen_ws = [&](int i) {
    std::vector<Vec3> out(n, Vec3::Zero());
    for (int j : g.neighbors(i)) {
      out[j] = ww[j];
      if (nt.active && j != i) out[j] += nt.wvec[i][j];
    }
    return out;
  };
  auto rel_poses = [&](int i) {
    std::vector<Pose> out(n);
    const Pose inv_i = inverse(wp[i]);
    for (int j : g.neighbors(i)) {
      if (j == i) continue;
      out[j] = compose(inv_i, wp[j]);
      if (nt.active) {
        out[j].R *= exp_so3(nt.rot[i][j]);
        out[j].T += nt.pos[i][j];
      }
    }
    return out;
  };
  auto rel_rots = [&](int i) {
    std::vector<Mat3> out(n, Mat3::Identity());
    const Mat3 ri_t = wp[i].R.transpose();
    for (int j : g.neighbors(i)) {
      if (j == i) continue;
      out[j] = ri_t * wp[j].R;
      if (nt.active) out[j] *= exp_so3(nt.rot[i][j]);
    }
    return out;
  };
  auto rel_ts = [&](int i) {
    std::vector<Vec3> out(n, Vec3::Zero());
    const Mat3 ri_t = wp[i].R.transpose();
    for (int j : g.neighbors(i)) {
      if (j == i) continue;
      out[j] = ri_t * (wp[j].T - wp[i].T);
      if (nt.active) out[j] += nt.pos[i][j];
    }
    return out;
  };
  auto rel_ws = [&](int i) {
    std::vector<Vec3> out(n, Vec3::Zero());
    const Mat3 ri_t = wp[i].R.transpose();
    for (int j : g.neighbors(i)) {
      if (j == i) continue;
      out[j] = (ri_t * wp[j].R) * ww[j] - ww[i];
      if (nt.active) out[j] += nt.wvec[i][j];
    }
    return out;
  };
  auto rel_us = [&](int i) {
    std::vector<Vec3> out(n, Vec3::Zero());
    const Mat3 ri_t = wp[i].R.transpose();
    const Vec3 vi_world = wp[i].R * wv[i];
    for (int j : g.neighbors(i)) {
      if (j == i) continue;
      out[j] = ri_t * (wp[j].R * wv[j] - vi_world);
      if (nt.active) out[j] += nt.vvec[i][j];
    }
    return out;
  };

  ControlSet out{std::vector<Twist>(n), std::vector<Vec3>(n, Vec3::Zero()),
                 std::vector<Vec3>(n, Vec3::Zero())};
  std::vector<Twist> tilde_kin(n);
  const Parameterization p(cfg.param);

  if (cfg.laws.rotation) switch (*cfg.laws.rotation) {
      case LawTag::FirstAbs:
        for (int i = 0; i < n; ++i)
          tilde_kin[i] = extract_twist(first_order_absolute(seen_poses(i), i, g));
        break;
      case LawTag::FirstRel:
        for (int i = 0; i < n; ++i)
          tilde_kin[i] = extract_twist(first_order_relative(rel_poses(i), i, g));
        break;
      case LawTag::RotAbs:
        for (int i = 0; i < n; ++i)
          tilde_kin[i].omega = attitude_absolute(seen_rots(i), i, g, p);
        break;
      case LawTag::RotRel:
        for (int i = 0; i < n; ++i)
          tilde_kin[i].omega = attitude_relative(rel_rots(i), i, g, p);
        break;
      case LawTag::RotFl:
        for (int i = 0; i < n; ++i)
          tilde_kin[i].omega = attitude_linearizing(seen_rots(i), i, g, p);
        break;
      case LawTag::TorqueAbs:
        for (int i = 0; i < n; ++i) {
          const Vec3 bracket = torque_absolute_bracket(seen_rots(i), seen_ws(i), i, g);
          out.tau[i] = formation_torque(bracket, target_of(cfg, i), st[i].omega,
                                        phys[i].inertia);
        }
        break;
      case LawTag::TorqueRel:
        for (int i = 0; i < n; ++i) {
          const Vec3 bracket =
              torque_relative_bracket(rel_rots(i), rel_ws(i), ww[i], i, g, p, cfg.gain);
          out.tau[i] = formation_torque(bracket, target_of(cfg, i), st[i].omega,
                                        phys[i].inertia);
        }
        break;
      default:
        throw ConfigInvalid("law set holds a non-attitude law in the rotation slot");
    }

  const bool translation_pending =
      cfg.laws.translation &&
      (!cfg.laws.rotation || *cfg.laws.translation != *cfg.laws.rotation);
  if (translation_pending) switch (*cfg.laws.translation) {
      case LawTag::TransAbs:
        for (int i = 0; i < n; ++i)
          tilde_kin[i].v = translation_absolute(seen_ts(i), i, g);
        break;
      case LawTag::TransRel:
        for (int i = 0; i < n; ++i)
          tilde_kin[i].v = translation_relative(rel_ts(i), i, g);
        break;
      case LawTag::Force:
        for (int i = 0; i < n; ++i) {
          const Vec3 bracket =
              force_bracket(rel_ts(i), rel_us(i), ww[i], wv[i], i, g, cfg.gain);
          Vec3 w_tilde_dot = Vec3::Zero();
          if (formation) {
            const Vec3 wdot = phys[i].inertia.ldlt().solve(
                out.tau[i] - st[i].omega.cross(phys[i].inertia * st[i].omega));
            w_tilde_dot = target_of(cfg, i).R * wdot;
          }
          out.f[i] = formation_force(bracket, target_of(cfg, i), ww[i], w_tilde_dot,
                                     phys[i].mass);
        }
        break;
      default:
        throw ConfigInvalid("law set holds a non-position law in the translation slot");
    }

  if (!law_set_is_dynamic(cfg.laws))
    for (int i = 0; i < n; ++i)
      out.kin[i] =
          formation ? deconjugate_twist(tilde_kin[i], target_of(cfg, i)) : tilde_kin[i];
  return out;
}

struct Deriv {
  std::vector<Vec3> wdot, vdot;
};

Deriv accel(const ControlSet& c, const std::vector<AgentState>& st,
            const std::vector<Mat3>& inertia, const std::vector<Mat3>& inertia_inv,
            const std::vector<double>& mass) {
  const int n = int(st.size());
  Deriv d{std::vector<Vec3>(n), std::vector<Vec3>(n)};
  for (int i = 0; i < n; ++i) {
    d.wdot[i] = inertia_inv[i] * (c.tau[i] - st[i].omega.cross(inertia[i] * st[i].omega));
    d.vdot[i] = c.f[i] / mass[i] - st[i].omega.cross(st[i].v);
  }
  return d;
}

/// Stage state for the next derivative evaluation: velocities advance
/// linearly by the previous slope; poses advance by the exact step of the
/// trapezoid-averaged twist.
std::vector<AgentState> make_stage(const std::vector<AgentState>& st, const Deriv& k,
                                   double delta) {
  std::vector<AgentState> out(st.size());
  for (std::size_t i = 0; i < st.size(); ++i) {
    out[i].omega = st[i].omega + delta * k.wdot[i];
    out[i].v = st[i].v + delta * k.vdot[i];
    const Twist avg{0.5 * (st[i].omega + out[i].omega), 0.5 * (st[i].v + out[i].v)};
    out[i].pose = step_constant_twist(st[i].pose, avg, delta);
  }
  return out;
}

void rk4_step(const TrialConfig& cfg, const std::vector<AgentPhys>& phys,
              const std::vector<Mat3>& inertia, const std::vector<Mat3>& inertia_inv,
              const std::vector<double>& mass, const Digraph& g,
              std::vector<AgentState>& st, const NoiseTable& nt, double h) {
  const ControlSet c1 = compute_all(cfg, phys, g, st, nt);
  const Deriv k1 = accel(c1, st, inertia, inertia_inv, mass);
  const std::vector<AgentState> s2 = make_stage(st, k1, 0.5 * h);
  const ControlSet c2 = compute_all(cfg, phys, g, s2, nt);
  const Deriv k2 = accel(c2, s2, inertia, inertia_inv, mass);
  const std::vector<AgentState> s3 = make_stage(st, k2, 0.5 * h);
  const ControlSet c3 = compute_all(cfg, phys, g, s3, nt);
  const Deriv k3 = accel(c3, s3, inertia, inertia_inv, mass);
  const std::vector<AgentState> s4 = make_stage(st, k3, h);
  const ControlSet c4 = compute_all(cfg, phys, g, s4, nt);
  const Deriv k4 = accel(c4, s4, inertia, inertia_inv, mass);

  for (std::size_t i = 0; i < st.size(); ++i) {
    const Vec3 w_new = st[i].omega + (h / 6.0) * (k1.wdot[i] + 2.0 * k2.wdot[i] +
                                                  2.0 * k3.wdot[i] + k4.wdot[i]);
    const Vec3 v_new = st[i].v + (h / 6.0) * (k1.vdot[i] + 2.0 * k2.vdot[i] +
                                              2.0 * k3.vdot[i] + k4.vdot[i]);
    // Simpson average of the body twist over the step drives one exact
    // exponential, keeping the pose on the group to machine precision.
    const Vec3 w_mid = 0.5 * (s2[i].omega + s3[i].omega);
    const Vec3 v_mid = 0.5 * (s2[i].v + s3[i].v);
    const Twist simpson{(st[i].omega + 4.0 * w_mid + w_new) / 6.0,
                        (st[i].v + 4.0 * v_mid + v_new) / 6.0};
    st[i].pose = step_constant_twist(st[i].pose, simpson, h);
    st[i].omega = w_new;
    st[i].v = v_new;
  }
}

bool state_ok(const std::vector<AgentState>& st) {
  for (const AgentState& s : st) {
    if (!s.pose.R.allFinite() || !s.pose.T.allFinite() || !s.omega.allFinite() ||
        !s.v.allFinite())
      return false;
    if (s.pose.T.norm() > kDivergenceNorm || s.omega.norm() > kDivergenceNorm ||
        s.v.norm() > kDivergenceNorm)
      return false;
  }
  return true;
}

void reproject_if_drifted(std::vector<AgentState>& st) {
  for (AgentState& s : st)
    if ((s.pose.R.transpose() * s.pose.R - Mat3::Identity()).norm() > 1e-9)
      s.pose.R = project_rotation(s.pose.R);
}

void record(Trace& tr, double t, const std::vector<AgentState>& st) {
  tr.times.push_back(t);
  tr.samples.push_back(st);
}

}  // namespace

Trace run_trial(const TrialConfig& cfg) {
  validate_trial_config(cfg);
  Rng rng(cfg.seed);
  const bool dynamic = law_set_is_dynamic(cfg.laws);

  Trace tr;
  tr.schedule = realize_timeline(cfg, rng);
  std::vector<AgentState> st = realize_init(cfg, tr.schedule, rng);

  const std::vector<AgentPhys> phys = expand_phys(cfg);
  std::vector<Mat3> inertia, inertia_inv;
  std::vector<double> mass;
  for (const AgentPhys& ph : phys) {
    inertia.push_back(ph.inertia);
    inertia_inv.push_back(ph.inertia.inverse());
    mass.push_back(ph.mass);
  }

  const double dt = 1.0 / cfg.sample_rate;
  const int steps = int(std::llround(cfg.horizon * cfg.sample_rate));
  const int sub = dynamic ? int(std::llround(dt / cfg.step)) : 1;
  const double h = dt / sub;

  long step_count = 0;
  for (int k = 0; k <= steps; ++k) {
    const double t = k * dt;
    try {
      if (!dynamic) {
        const Digraph& g = tr.schedule.at(t);
        const NoiseTable nt = draw_noise(g, cfg.noise, rng);
        const ControlSet c = compute_all(cfg, phys, g, st, nt);
        for (int i = 0; i < cfg.n; ++i) {
          st[i].omega = c.kin[i].omega;
          st[i].v = c.kin[i].v;
        }
        record(tr, t, st);
        if (k == steps) break;
        for (int i = 0; i < cfg.n; ++i)
          st[i].pose = step_constant_twist(st[i].pose, {st[i].omega, st[i].v}, dt);
        ++step_count;
        if (step_count % kReprojectEvery == 0) reproject_if_drifted(st);
      } else {
        record(tr, t, st);
        if (k == steps) break;
        for (int s = 0; s < sub; ++s) {
          const Digraph& g = tr.schedule.at(t + s * h);
          const NoiseTable nt = draw_noise(g, cfg.noise, rng);
          rk4_step(cfg, phys, inertia, inertia_inv, mass, g, st, nt, h);
          ++step_count;
          if (step_count % kReprojectEvery == 0) reproject_if_drifted(st);
        }
      }
    } catch (const Error& e) {
      tr.diverged = true;
      tr.failure = e.what();
      if (tr.times.empty() || tr.times.back() < t - kTimeSlop) {
        for (AgentState& s : st) {
          s.omega = Vec3::Zero();
          s.v = Vec3::Zero();
        }
        record(tr, t, st);
      }
      break;
    }
    if (!state_ok(st)) {
      tr.diverged = true;
      tr.failure = "state norm exceeded 1e9 or became non-finite";
      break;
    }
  }
  tr.end_time = tr.times.empty() ? 0.0 : tr.times.back();
  return tr;
}

namespace {

void run_one_trial(const TrialConfig& cfg, int index, const TrialJudge& judge,
                   McResult& res, std::vector<std::uint8_t>& diverged) {
  TrialConfig c = cfg;
  c.seed = Rng::child_seed(cfg.seed, std::uint64_t(index));
  const Trace tr = run_trial(c);
  const TrialVerdict v = judge(tr);
  res.success[index] = v.success ? 1 : 0;
  res.rotation_errors[index] = v.rotation_error;
  res.translation_errors[index] = v.translation_error;
  diverged[index] = tr.diverged ? 1 : 0;
}

void prepare_result(McResult& res, int trials) {
  res.trials = trials;
  res.success.assign(trials, 0);
  res.rotation_errors.assign(trials, 0.0);
  res.translation_errors.assign(trials, 0.0);
}

void tally(McResult& res, const std::vector<std::uint8_t>& diverged) {
  res.successes = 0;
  res.divergences = 0;
  for (std::size_t t = 0; t < res.success.size(); ++t) {
    res.successes += res.success[t];
    res.divergences += diverged[t];
  }
}

}  // namespace

McResult monte_carlo_serial(const TrialConfig& cfg, int trials, const TrialJudge& judge) {
  if (trials < 1) throw ConfigInvalid("trial count must be positive");
  validate_trial_config(cfg);
  McResult res;
  prepare_result(res, trials);
  std::vector<std::uint8_t> diverged(trials, 0);
  for (int t = 0; t < trials; ++t) run_one_trial(cfg, t, judge, res, diverged);
  tally(res, diverged);
  return res;
}

McResult monte_carlo_parallel(const TrialConfig& cfg, int trials, const TrialJudge& judge,
                              int threads) {
#ifndef _OPENMP
  (void)threads;
  return monte_carlo_serial(cfg, trials, judge);
#else
  if (trials < 1) throw ConfigInvalid("trial count must be positive");
  validate_trial_config(cfg);
  McResult res;
  prepare_result(res, trials);
  std::vector<std::uint8_t> diverged(trials, 0);
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
  for (int t = 0; t < trials; ++t) run_one_trial(cfg, t, judge, res, diverged);
  tally(res, diverged);
  return res;
#endif
}

}  // namespace sesim
