#include "sesim/simulator.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace {

using namespace sesim;

Mat3 rot_z(double a) {
  Mat3 r;
  r << std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a), 0.0, 0.0, 0.0, 1.0;
  return r;
}

Mat3 flip_z() {
  Mat3 r = Mat3::Identity();
  r(0, 0) = -1.0;
  r(1, 1) = -1.0;
  return r;
}

double max_pairwise_geodesic(const std::vector<AgentState>& s) {
  double worst = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j)
      worst = std::max(worst, geodesic_distance(s[i].pose.R, s[j].pose.R));
  return worst;
}

double translation_spread(const std::vector<AgentState>& s) {
  Vec3 mean = Vec3::Zero();
  for (const auto& a : s) mean += a.pose.T;
  mean /= double(s.size());
  double sq = 0.0;
  for (const auto& a : s) sq += (a.pose.T - mean).squaredNorm();
  return std::sqrt(sq);
}

/// omega_bar' of the relative torque law recomputed from a trace sample.
Vec3 omega_bar_rel_at(const std::vector<AgentState>& s, int i, const Digraph& g,
                      const Parameterization& p) {
  std::vector<Mat3> rel(s.size(), Mat3::Identity());
  for (int j : g.neighbors(i))
    rel[j] = s[i].pose.R.transpose() * s[j].pose.R;
  return omega_bar_relative(rel, s[i].omega, i, g, p);
}

/// vbar of the force law recomputed from a trace sample.
Vec3 velocity_bar_at(const std::vector<AgentState>& s, int i, const Digraph& g) {
  std::vector<Vec3> rel_t(s.size(), Vec3::Zero());
  for (int j : g.neighbors(i))
    rel_t[j] = s[i].pose.R.transpose() * (s[j].pose.T - s[i].pose.T);
  return velocity_bar(rel_t, s[i].v, i, g);
}

bool same_weights(const Digraph& a, const Digraph& b) {
  return a.n == b.n && (a.weights - b.weights).norm() == 0.0;
}

}  // namespace

TEST_CASE("law sets parse, canonicalize, and reject bad combinations") {
  LawSet single = parse_law_set("rot_abs");
  CHECK(single.rotation == LawTag::RotAbs);
  CHECK_FALSE(single.translation.has_value());
  CHECK_FALSE(law_set_is_dynamic(single));
  CHECK(law_set_name(single) == "rot_abs");

  LawSet first = parse_law_set("first_rel");
  CHECK(first.rotation == LawTag::FirstRel);
  CHECK(first.translation == LawTag::FirstRel);
  CHECK(law_set_name(first) == "first_rel");
  CHECK_FALSE(law_set_is_dynamic(first));

  LawSet combo = parse_law_set("torque_abs+force");
  CHECK(combo.rotation == LawTag::TorqueAbs);
  CHECK(combo.translation == LawTag::Force);
  CHECK(law_set_is_dynamic(combo));
  CHECK(law_set_name(combo) == "torque_abs+force");

  // Order-insensitive input, rotation-first canonical name.
  LawSet swapped = parse_law_set("force+torque_rel");
  CHECK(swapped.rotation == LawTag::TorqueRel);
  CHECK(swapped.translation == LawTag::Force);
  CHECK(law_set_name(swapped) == "torque_rel+force");

  LawSet kin = parse_law_set("rot_fl+trans_rel");
  CHECK_FALSE(law_set_is_dynamic(kin));
  CHECK(law_set_name(kin) == "rot_fl+trans_rel");

  LawSet free = parse_law_set("free");
  CHECK_FALSE(free.rotation.has_value());
  CHECK_FALSE(free.translation.has_value());
  CHECK(law_set_is_dynamic(free));
  CHECK(law_set_name(free) == "free");

  LawSet just_force = parse_law_set("force");
  CHECK_FALSE(just_force.rotation.has_value());
  CHECK(just_force.translation == LawTag::Force);
  CHECK(law_set_is_dynamic(just_force));

  CHECK_THROWS_AS(parse_law_set("rot_abs+rot_rel"), ConfigInvalid);
  CHECK_THROWS_AS(parse_law_set("rot_abs+force"), ConfigInvalid);
  CHECK_THROWS_AS(parse_law_set("first_abs+trans_rel"), ConfigInvalid);
  CHECK_THROWS_AS(parse_law_set("trans_abs+trans_rel"), ConfigInvalid);
  CHECK_THROWS_AS(parse_law_set("free+force"), ConfigInvalid);
  CHECK_THROWS_AS(parse_law_set("banana"), ConfigInvalid);
  CHECK_THROWS_AS(parse_law_set(""), ConfigInvalid);
}

TEST_CASE("single-axis kinematic attitude trial follows the exact per-step contraction") {
  // One informed agent contracting toward a fixed one: with axis-angle
  // coordinates and a fixed axis, every hold interval multiplies the angle by
  // (1 - a dt) exactly, so the whole sampled trajectory has a closed form.
  const double a = 0.5;
  const Vec3 axis = Vec3(0.3, -0.5, 0.8).normalized();
  const Vec3 x0 = 0.8 * axis;

  TrialConfig cfg;
  cfg.n = 2;
  cfg.laws = parse_law_set("rot_abs");
  cfg.param = ParamKind::AxisAngle;
  cfg.horizon = 5.0;
  cfg.sample_rate = 10.0;
  cfg.schedule.kind = ScheduleSpec::Kind::Fixed;
  cfg.schedule.fixed = Digraph::from_edges(2, {{0, 1}}, a);
  cfg.init.explicit_states = {AgentState{Pose{exp_so3(x0), Vec3::Zero()}, Vec3::Zero(),
                                         Vec3::Zero()},
                              AgentState{}};

  Trace tr = run_trial(cfg);
  REQUIRE_FALSE(tr.diverged);
  REQUIRE(tr.times.size() == 51);
  CHECK(tr.end_time == doctest::Approx(5.0));

  const double dt = 0.1;
  double factor = 1.0;
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    CHECK(tr.times[k] == doctest::Approx(k * dt).epsilon(1e-12));
    const Vec3 expect = factor * x0;
    CHECK((log_so3(tr.samples[k][0].pose.R) - expect).norm() <= 1e-12);
    // The recorded kinematic twist is the command for the coming interval.
    CHECK((tr.samples[k][0].omega + a * expect).norm() <= 1e-12);
    CHECK(tr.samples[k][0].v.norm() == 0.0);
    // The uninformed agent never moves.
    CHECK((tr.samples[k][1].pose.R - Mat3::Identity()).norm() <= 1e-15);
    CHECK(tr.samples[k][1].pose.T.norm() == 0.0);
    factor *= 1.0 - a * dt;
  }
}

TEST_CASE("two-agent translation trial matches the discrete consensus recursion") {
  const Vec3 t0(0.2, 0.4, -0.1);
  const Vec3 t1 = t0 + Vec3(1.0, -0.4, 0.2);

  TrialConfig cfg;
  cfg.n = 2;
  cfg.laws = parse_law_set("trans_rel");
  cfg.horizon = 3.0;
  cfg.sample_rate = 10.0;
  cfg.schedule.kind = ScheduleSpec::Kind::Fixed;
  cfg.schedule.fixed = Digraph::complete(2);
  cfg.init.explicit_states = {AgentState{Pose{Mat3::Identity(), t0}, Vec3::Zero(),
                                         Vec3::Zero()},
                              AgentState{Pose{Mat3::Identity(), t1}, Vec3::Zero(),
                                         Vec3::Zero()}};

  Trace tr = run_trial(cfg);
  REQUIRE_FALSE(tr.diverged);
  REQUIRE(tr.times.size() == 31);

  const Vec3 centroid = 0.5 * (t0 + t1);
  const Vec3 delta0 = t1 - t0;
  double factor = 1.0;
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const Vec3 delta = tr.samples[k][1].pose.T - tr.samples[k][0].pose.T;
    CHECK((delta - factor * delta0).norm() <= 1e-13);
    const Vec3 mid = 0.5 * (tr.samples[k][0].pose.T + tr.samples[k][1].pose.T);
    CHECK((mid - centroid).norm() <= 1e-14);
    // Rotations were identity and stay identity under a pure position law.
    CHECK((tr.samples[k][0].pose.R - Mat3::Identity()).norm() <= 1e-15);
    factor *= 1.0 - 2.0 * 0.1;
  }
}

TEST_CASE("free rigid body conserves energy and momentum and precesses analytically") {
  const double A = 2.0, C = 1.0;
  AgentPhys phys;
  phys.inertia = Vec3(A, A, C).asDiagonal();

  TrialConfig cfg;
  cfg.n = 1;
  cfg.laws = parse_law_set("free");
  cfg.horizon = 2.0;
  cfg.sample_rate = 10.0;
  cfg.step = 1e-3;
  cfg.schedule.kind = ScheduleSpec::Kind::Fixed;
  cfg.schedule.fixed = Digraph::complete(1);
  cfg.phys = {phys};

  SUBCASE("axisymmetric body precesses at the analytic rate") {
    const Vec3 w0(0.3, -0.1, 0.7);
    const Mat3 r0 = exp_so3(Vec3(0.2, 0.5, -0.4));
    cfg.init.explicit_states = {AgentState{Pose{r0, Vec3::Zero()}, w0, Vec3::Zero()}};

    Trace tr = run_trial(cfg);
    REQUIRE_FALSE(tr.diverged);

    const double lambda = ((A - C) / A) * w0.z();
    const double energy0 = w0.dot(phys.inertia * w0);
    const Vec3 momentum_world0 = r0 * (phys.inertia * w0);
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      const double t = tr.times[k];
      const Vec3 w = tr.samples[k][0].omega;
      const std::complex<double> planar0(w0.x(), w0.y());
      const std::complex<double> planar =
          std::exp(std::complex<double>(0.0, -lambda * t)) * planar0;
      CHECK(std::abs(w.x() - planar.real()) <= 1e-10);
      CHECK(std::abs(w.y() - planar.imag()) <= 1e-10);
      CHECK(std::abs(w.z() - w0.z()) <= 1e-12);
      CHECK(std::abs(w.dot(phys.inertia * w) - energy0) <= 1e-11);
      CHECK(std::abs((phys.inertia * w).norm() - (phys.inertia * w0).norm()) <= 1e-11);
      // World angular momentum also tests the pose update accuracy.
      const Vec3 momentum_world = tr.samples[k][0].pose.R * (phys.inertia * w);
      CHECK((momentum_world - momentum_world0).norm() <= 1e-7);
    }
  }

  SUBCASE("principal-axis spin is an exact fixed point with closed-form pose") {
    const Vec3 w0(0.0, 0.0, 0.9);
    const Mat3 r0 = exp_so3(Vec3(0.1, -0.3, 0.2));
    cfg.init.explicit_states = {AgentState{Pose{r0, Vec3::Zero()}, w0, Vec3::Zero()}};

    Trace tr = run_trial(cfg);
    REQUIRE_FALSE(tr.diverged);
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      CHECK((tr.samples[k][0].omega - w0).norm() == 0.0);
      const Mat3 expect = r0 * exp_so3(tr.times[k] * w0);
      CHECK((tr.samples[k][0].pose.R - expect).norm() <= 1e-11);
    }
  }
}

TEST_CASE("relative torque law decays its velocity error at exactly the gain rate") {
  TrialConfig cfg;
  cfg.n = 3;
  cfg.laws = parse_law_set("torque_rel");
  cfg.param = ParamKind::SinMap;
  cfg.horizon = 2.0;
  cfg.sample_rate = 10.0;
  cfg.step = 1e-3;
  cfg.gain = 3.0;
  cfg.schedule.kind = ScheduleSpec::Kind::Fixed;
  cfg.schedule.fixed = Digraph::from_edges(3, {{0, 1}, {1, 2}, {2, 0}, {0, 2}}, 0.7);
  cfg.init.rotation = InitSpec::Rotation::Ball;
  cfg.init.rotation_radius = 0.3 * (std::numbers::pi / 2.0);
  cfg.init.translation = InitSpec::Translation::Zero;
  cfg.init.omega = InitSpec::Velocity::ErrorBall;
  cfg.init.omega_radius = 0.5;
  cfg.seed = 90;

  Trace tr = run_trial(cfg);
  REQUIRE_FALSE(tr.diverged);

  const Parameterization p(cfg.param);
  const Digraph& g = tr.schedule.at(0.0);
  for (int i = 0; i < cfg.n; ++i) {
    const Vec3 err0 = omega_bar_rel_at(tr.samples[0], i, g, p);
    CHECK(err0.norm() <= cfg.init.omega_radius + 1e-12);
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      const Vec3 expect = std::exp(-cfg.gain * tr.times[k]) * err0;
      const Vec3 got = omega_bar_rel_at(tr.samples[k], i, g, p);
      const double tol = 1e-4 * std::max(expect.norm(), 1e-2 * err0.norm());
      CHECK((got - expect).norm() <= tol);
    }
  }
}

TEST_CASE("force law decays its velocity error at exactly the gain rate") {
  TrialConfig cfg;
  cfg.n = 3;
  cfg.laws = parse_law_set("force");
  cfg.horizon = 2.0;
  cfg.sample_rate = 10.0;
  cfg.step = 1e-3;
  cfg.gain = 3.0;
  cfg.schedule.kind = ScheduleSpec::Kind::Fixed;
  cfg.schedule.fixed = Digraph::from_edges(3, {{0, 1}, {1, 2}}, 1.0);
  cfg.init.rotation = InitSpec::Rotation::Ball;
  cfg.init.rotation_radius = std::numbers::pi;
  cfg.init.translation = InitSpec::Translation::Box;
  cfg.init.box_size = 1.0;
  cfg.init.velocity = InitSpec::Velocity::ErrorBall;
  cfg.init.velocity_radius = 0.5;
  cfg.seed = 91;

  Trace tr = run_trial(cfg);
  REQUIRE_FALSE(tr.diverged);

  const Digraph& g = tr.schedule.at(0.0);
  for (int i = 0; i < cfg.n; ++i) {
    // No torque and no initial spin: attitudes must stay frozen.
    const Mat3 r0 = tr.samples[0][i].pose.R;
    CHECK((tr.last()[i].pose.R - r0).norm() <= 1e-12);

    const Vec3 err0 = velocity_bar_at(tr.samples[0], i, g);
    CHECK(err0.norm() <= cfg.init.velocity_radius + 1e-12);
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      const Vec3 expect = std::exp(-cfg.gain * tr.times[k]) * err0;
      const Vec3 got = velocity_bar_at(tr.samples[k], i, g);
      const double tol = 1e-4 * std::max(expect.norm(), 1e-2 * err0.norm());
      CHECK((got - expect).norm() <= tol);
    }
  }
}

TEST_CASE("error-ball initialization bounds the starting backstepping error") {
  for (std::uint64_t seed = 92; seed < 97; ++seed) {
    SUBCASE("absolute torque law") {
      TrialConfig cfg;
      cfg.n = 4;
      cfg.laws = parse_law_set("torque_abs");
      cfg.horizon = 0.1;
      cfg.schedule.kind = ScheduleSpec::Kind::RandomConstant;
      cfg.init.rotation_radius = 0.4 * std::numbers::pi;
      cfg.init.omega = InitSpec::Velocity::ErrorBall;
      cfg.init.omega_radius = 0.9;
      cfg.seed = seed;

      Trace tr = run_trial(cfg);
      const Digraph& g = tr.schedule.at(0.0);
      for (int i = 0; i < cfg.n; ++i) {
        std::vector<Mat3> seen(cfg.n, Mat3::Identity());
        for (int j : g.neighbors(i)) seen[j] = tr.samples[0][j].pose.R;
        const Vec3 err = omega_bar_absolute(seen, tr.samples[0][i].omega, i, g);
        CHECK(err.norm() <= cfg.init.omega_radius + 1e-12);
      }
    }

    SUBCASE("relative torque law under a formation shift") {
      TrialConfig cfg;
      cfg.n = 3;
      cfg.laws = parse_law_set("torque_rel");
      cfg.param = ParamKind::QuatVec;
      cfg.horizon = 0.1;
      cfg.schedule.kind = ScheduleSpec::Kind::RandomConstant;
      cfg.init.rotation_radius = 0.5;
      cfg.init.omega = InitSpec::Velocity::ErrorBall;
      cfg.init.omega_radius = 0.4;
      cfg.formation.enabled = true;
      cfg.formation.targets = {Pose{},
                               Pose{rot_z(0.7), Vec3(1.0, 0.0, 0.0)},
                               Pose{rot_z(-0.4), Vec3(0.0, 1.0, 0.5)}};
      cfg.seed = seed;

      Trace tr = run_trial(cfg);
      const Digraph& g = tr.schedule.at(0.0);
      const Parameterization p(cfg.param);
      // The error ball is promised in the shifted (tilde) variables.
      std::vector<AgentState> tilde(cfg.n);
      for (int i = 0; i < cfg.n; ++i) {
        tilde[i].pose = tilde_pose(tr.samples[0][i].pose, cfg.formation.targets[i]);
        tilde[i].omega = cfg.formation.targets[i].R * tr.samples[0][i].omega;
      }
      for (int i = 0; i < cfg.n; ++i) {
        const Vec3 err = omega_bar_rel_at(tilde, i, g, p);
        CHECK(err.norm() <= cfg.init.omega_radius + 1e-12);
      }
    }
  }
}

TEST_CASE("trials are deterministic in the seed, including noise and switching") {
  TrialConfig cfg;
  cfg.n = 4;
  cfg.laws = parse_law_set("rot_rel");
  cfg.param = ParamKind::ModifiedRodrigues;
  cfg.horizon = 2.0;
  cfg.sample_rate = 10.0;
  cfg.noise = 0.1;
  cfg.schedule.kind = ScheduleSpec::Kind::RandomSwitching;
  cfg.schedule.period = 0.5;
  cfg.init.rotation_radius = 1.2;
  cfg.init.translation = InitSpec::Translation::Box;
  cfg.seed = 404;

  Trace a = run_trial(cfg);
  Trace b = run_trial(cfg);
  REQUIRE(a.times.size() == b.times.size());
  REQUIRE(a.schedule.times.size() == b.schedule.times.size());
  for (std::size_t k = 0; k < a.schedule.times.size(); ++k) {
    CHECK(a.schedule.times[k] == b.schedule.times[k]);
    CHECK(same_weights(a.schedule.graphs[k], b.schedule.graphs[k]));
  }
  for (std::size_t k = 0; k < a.times.size(); ++k)
    for (int i = 0; i < cfg.n; ++i) {
      CHECK((a.samples[k][i].pose.R - b.samples[k][i].pose.R).norm() == 0.0);
      CHECK((a.samples[k][i].pose.T - b.samples[k][i].pose.T).norm() == 0.0);
      CHECK((a.samples[k][i].omega - b.samples[k][i].omega).norm() == 0.0);
      // Measurement noise never knocks the state off the group.
      CHECK(is_rotation(a.samples[k][i].pose.R, 1e-9));
    }

  TrialConfig other = cfg;
  other.seed = 405;
  Trace c = run_trial(other);
  CHECK((a.samples[0][0].pose.R - c.samples[0][0].pose.R).norm() > 1e-6);
}

TEST_CASE("monte carlo batches are bit-identical across serial and parallel runs") {
  TrialConfig cfg;
  cfg.n = 4;
  cfg.laws = parse_law_set("rot_abs");
  cfg.param = ParamKind::AxisAngle;
  cfg.horizon = 6.0;
  cfg.sample_rate = 10.0;
  cfg.schedule.kind = ScheduleSpec::Kind::RandomConstant;
  cfg.init.rotation_radius = 1.2;
  cfg.init.translation = InitSpec::Translation::Zero;
  cfg.seed = 777;

  const TrialJudge judge = [](const Trace& tr) {
    TrialVerdict v;
    v.rotation_error = max_pairwise_geodesic(tr.last());
    v.translation_error = translation_spread(tr.last());
    v.success = !tr.diverged && v.rotation_error < 0.3;
    return v;
  };

  const int trials = 24;
  McResult serial = monte_carlo_serial(cfg, trials, judge);
  McResult par4 = monte_carlo_parallel(cfg, trials, judge, 4);
  McResult par1 = monte_carlo_parallel(cfg, trials, judge, 1);

  REQUIRE(serial.trials == trials);
  REQUIRE(int(serial.success.size()) == trials);
  CHECK(serial.successes == par4.successes);
  CHECK(serial.divergences == par4.divergences);
  for (int t = 0; t < trials; ++t) {
    CHECK(serial.success[t] == par4.success[t]);
    CHECK(serial.rotation_errors[t] == par4.rotation_errors[t]);
    CHECK(serial.translation_errors[t] == par4.translation_errors[t]);
    CHECK(serial.success[t] == par1.success[t]);
    CHECK(serial.rotation_errors[t] == par1.rotation_errors[t]);
  }
  // A six-second horizon comfortably contracts a 1.2-radius bundle.
  CHECK(serial.successes >= 20);
  CHECK(serial.divergences == 0);
}

TEST_CASE("attitude-blind position law diverges from the flipped configuration") {
  TrialConfig cfg;
  cfg.n = 3;
  cfg.laws = parse_law_set("trans_abs");
  cfg.sample_rate = 10.0;
  cfg.schedule.kind = ScheduleSpec::Kind::Fixed;
  cfg.schedule.fixed = Digraph::complete(3);
  cfg.init.explicit_states = {
      AgentState{Pose{flip_z(), Vec3(0.0, 0.0, 0.0)}, Vec3::Zero(), Vec3::Zero()},
      AgentState{Pose{flip_z(), Vec3(1.0, 0.0, 0.0)}, Vec3::Zero(), Vec3::Zero()},
      AgentState{Pose{flip_z(), Vec3(0.3, 0.8, 0.0)}, Vec3::Zero(), Vec3::Zero()}};

  SUBCASE("short horizon: monotone growth, no divergence flag") {
    cfg.horizon = 3.0;
    Trace tr = run_trial(cfg);
    REQUIRE_FALSE(tr.diverged);
    double prev = translation_spread(tr.samples[0]);
    for (std::size_t k = 1; k < tr.times.size(); ++k) {
      const double cur = translation_spread(tr.samples[k]);
      CHECK(cur > prev);
      prev = cur;
    }
    CHECK(prev > 100.0 * translation_spread(tr.samples[0]));
  }

  SUBCASE("long horizon: the trial is truncated and flagged") {
    cfg.horizon = 20.0;
    Trace tr = run_trial(cfg);
    CHECK(tr.diverged);
    CHECK_FALSE(tr.failure.empty());
    CHECK(tr.times.back() < 20.0);
    CHECK(tr.end_time == tr.times.back());
    for (const auto& s : tr.last()) CHECK(s.pose.T.allFinite());
  }
}

TEST_CASE("schedule specs realize the documented graph timelines") {
  const Digraph tree_a = Digraph::from_edges(3, {{0, 1}, {1, 2}});
  const Digraph tree_b = Digraph::from_edges(3, {{1, 0}, {2, 1}});

  TrialConfig cfg;
  cfg.n = 3;
  cfg.laws = parse_law_set("rot_rel");
  cfg.horizon = 2.0;
  cfg.init.rotation_radius = 0.5;
  cfg.seed = 9090;

  SUBCASE("alternating graphs switch every period") {
    cfg.schedule.kind = ScheduleSpec::Kind::Alternating;
    cfg.schedule.graphs = {tree_a, tree_b};
    cfg.schedule.period = 0.5;
    Trace tr = run_trial(cfg);
    REQUIRE(tr.schedule.times.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(tr.schedule.times[k] == doctest::Approx(0.5 * k));
      CHECK(same_weights(tr.schedule.graphs[k], k % 2 == 0 ? tree_a : tree_b));
    }
    CHECK(same_weights(tr.schedule.at(0.25), tree_a));
    CHECK(same_weights(tr.schedule.at(0.5), tree_b));
    CHECK(same_weights(tr.schedule.at(1.99), tree_b));
    const Digraph u = tr.schedule.union_over(0.0, 1.0);
    CHECK(same_weights(u, union_graphs(tree_a, tree_b)));
  }

  SUBCASE("random switching draws a quasi-strong graph per period") {
    cfg.schedule.kind = ScheduleSpec::Kind::RandomSwitching;
    cfg.schedule.period = 0.5;
    Trace tr = run_trial(cfg);
    REQUIRE(tr.schedule.times.size() == 4);
    for (const Digraph& g : tr.schedule.graphs) {
      CHECK(is_quasi_strongly_connected(g));
      CHECK(g.weights.maxCoeff() <= 2.0);
    }
  }

  SUBCASE("disconnected control splits the team into two blocks") {
    cfg.n = 5;
    cfg.schedule.kind = ScheduleSpec::Kind::Disconnected;
    Trace tr = run_trial(cfg);
    REQUIRE(tr.schedule.times.size() == 1);
    const Digraph& g = tr.schedule.graphs[0];
    CHECK_FALSE(is_quasi_strongly_connected(g));
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(2, 3));
    CHECK(g.has_edge(3, 4));
    CHECK_FALSE(g.has_edge(1, 2));
    CHECK_FALSE(g.has_edge(2, 1));
  }

  SUBCASE("explicit schedules pass through unchanged") {
    cfg.schedule.kind = ScheduleSpec::Kind::Explicit;
    cfg.schedule.explicit_schedule =
        SwitchingSchedule::periodic({tree_a, tree_b}, 0.5, 0.0, 2.0);
    Trace tr = run_trial(cfg);
    REQUIRE(tr.schedule.times.size() == 4);
    CHECK(same_weights(tr.schedule.at(0.75), tree_b));
  }
}

TEST_CASE("formation trial converges to the target offsets") {
  TrialConfig cfg;
  cfg.n = 3;
  cfg.laws = parse_law_set("first_rel");
  cfg.horizon = 30.0;
  cfg.sample_rate = 10.0;
  cfg.schedule.kind = ScheduleSpec::Kind::Fixed;
  cfg.schedule.fixed = Digraph::complete(3);
  cfg.init.rotation_radius = 0.5;
  cfg.init.translation = InitSpec::Translation::Box;
  cfg.init.box_size = 0.5;
  cfg.formation.enabled = true;
  cfg.formation.targets = {Pose{}, Pose{rot_z(0.4), Vec3(1.0, 0.0, 0.0)},
                           Pose{rot_z(-0.3), Vec3(0.0, 1.0, 0.0)}};
  cfg.seed = 31;

  Trace tr = run_trial(cfg);
  REQUIRE_FALSE(tr.diverged);

  std::vector<AgentState> tilde(cfg.n);
  for (int i = 0; i < cfg.n; ++i)
    tilde[i].pose = tilde_pose(tr.last()[i].pose, cfg.formation.targets[i]);
  CHECK(max_pairwise_geodesic(tilde) < 1e-3);
  CHECK(translation_spread(tilde) < 1e-3);
}

TEST_CASE("trial configs are validated before running") {
  TrialConfig base;
  base.n = 3;
  base.laws = parse_law_set("rot_abs");
  base.horizon = 2.0;
  base.schedule.kind = ScheduleSpec::Kind::RandomConstant;

  CHECK_NOTHROW(validate_trial_config(base));

  TrialConfig bad = base;
  bad.n = 0;
  CHECK_THROWS_AS(validate_trial_config(bad), ConfigInvalid);

  bad = base;
  bad.horizon = 2.05;  // not on the 10 Hz grid
  CHECK_THROWS_AS(validate_trial_config(bad), ConfigInvalid);

  bad = base;
  bad.init.omega = InitSpec::Velocity::Ball;  // kinematic laws carry no velocity state
  bad.init.omega_radius = 0.1;
  CHECK_THROWS_AS(validate_trial_config(bad), ConfigInvalid);

  bad = base;
  bad.laws = parse_law_set("force");
  bad.init.omega = InitSpec::Velocity::ErrorBall;  // no rotation law to center on
  bad.init.omega_radius = 0.1;
  CHECK_THROWS_AS(validate_trial_config(bad), ConfigInvalid);

  bad = base;
  bad.laws = parse_law_set("torque_abs");
  bad.step = 3e-4;  // sample interval is not a multiple
  CHECK_THROWS_AS(validate_trial_config(bad), ConfigInvalid);

  bad = base;
  bad.laws = parse_law_set("torque_rel");
  bad.gain = 0.0;
  CHECK_THROWS_AS(validate_trial_config(bad), ConfigInvalid);

  bad = base;
  bad.phys.resize(2);  // neither shared nor per-agent
  CHECK_THROWS_AS(validate_trial_config(bad), ConfigInvalid);

  bad = base;
  bad.laws = parse_law_set("free");
  bad.phys.resize(1);
  bad.phys[0].inertia(0, 1) = 0.2;  // asymmetric inertia
  CHECK_THROWS_AS(validate_trial_config(bad), ConfigInvalid);

  bad = base;
  bad.laws = parse_law_set("free");
  bad.phys.resize(1);
  bad.phys[0].mass = 0.0;
  CHECK_THROWS_AS(validate_trial_config(bad), ConfigInvalid);

  bad = base;
  bad.schedule.kind = ScheduleSpec::Kind::Fixed;
  bad.schedule.fixed = Digraph::complete(4);  // wrong agent count
  CHECK_THROWS_AS(validate_trial_config(bad), ConfigInvalid);

  bad = base;
  bad.schedule.kind = ScheduleSpec::Kind::Alternating;
  bad.schedule.graphs = {};
  CHECK_THROWS_AS(validate_trial_config(bad), ConfigInvalid);

  bad = base;
  bad.schedule.kind = ScheduleSpec::Kind::RandomSwitching;
  bad.schedule.period = 0.0;
  CHECK_THROWS_AS(validate_trial_config(bad), ConfigInvalid);

  bad = base;
  bad.schedule.kind = ScheduleSpec::Kind::Explicit;
  bad.schedule.explicit_schedule =
      SwitchingSchedule::constant(Digraph::complete(3), 0.0, 1.0);  // too short
  CHECK_THROWS_AS(validate_trial_config(bad), ConfigInvalid);

  bad = base;
  bad.init.explicit_states.resize(2);  // wrong agent count
  CHECK_THROWS_AS(validate_trial_config(bad), ConfigInvalid);

  bad = base;
  bad.noise = -0.1;
  CHECK_THROWS_AS(validate_trial_config(bad), ConfigInvalid);

  bad = base;
  bad.formation.enabled = true;
  bad.formation.targets.resize(2);  // wrong target count
  CHECK_THROWS_AS(validate_trial_config(bad), ConfigInvalid);
}
