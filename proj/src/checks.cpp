#include "sesim/checks.hpp"

#include "sesim/analysis.hpp"
#include "sesim/rng.hpp"
#include "sesim/simulator.hpp"
#include "sesim/so3.hpp"
#include "sesim/topology.hpp"
#include "sesim/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace sesim {
namespace {

constexpr double kPi = 3.14159265358979323846;

std::string strf(const char* fmt, ...) {
  char buf[240];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

std::uint64_t child(std::uint64_t seed, std::uint64_t index) {
  return Rng::child_seed(seed, index);
}

/// Root-sum-square over agents of a per-agent error vector at each sample.
std::vector<double> rss_series(const Trace& tr,
                               const std::function<Vec3(const std::vector<AgentState>&, int)>& f) {
  std::vector<double> out;
  out.reserve(tr.samples.size());
  for (const std::vector<AgentState>& sample : tr.samples) {
    double total = 0.0;
    for (int i = 0; i < int(sample.size()); ++i) total += f(sample, i).squaredNorm();
    out.push_back(std::sqrt(total));
  }
  return out;
}

}  // namespace

CheckResult check_roundtrips(std::uint64_t seed) {
  Rng rng(seed);
  const int samples = 10000;
  // Chordal measure ||a - b||_F / sqrt(2): equals the geodesic distance to
  // third order for small errors and resolves to machine precision, where
  // the acos-based distance saturates near 1e-8.
  const auto gap = [](const Mat3& a, const Mat3& b) {
    return (a - b).norm() / std::sqrt(2.0);
  };
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const Mat3 r = sample_rotation_ball(kPi - 1e-5, rng);
    worst = std::max(worst, gap(exp_so3(log_so3(r)), r));
  }
  for (ParamKind kind : Parameterization::all()) {
    const Parameterization p(kind);
    const double radius = p.injectivity_radius() * (1.0 - 2e-6);
    for (int k = 0; k < samples; ++k) {
      const Mat3 r = sample_rotation_ball(radius, rng);
      worst = std::max(worst, gap(from_param(to_param(r, p), p), r));
    }
  }
  CheckResult res;
  res.name = "roundtrips";
  res.passed = worst <= 1e-9;
  res.detail = strf("worst chart roundtrip %.2e rad over %d samples per chart (tol 1e-9)", worst,
                    samples);
  return res;
}

CheckResult check_jacobian_fd(std::uint64_t seed) {
  Rng rng(seed);
  const double h = 1e-6;
  const int states = 1000;
  double worst = 0.0;
  for (int k = 0; k < states; ++k) {
    const Mat3 r = sample_rotation_ball(0.9 * kPi, rng);
    const Vec3 x = log_so3(r);
    const Vec3 w = rng.unit_vector();
    const Vec3 fd = (log_so3(r * exp_so3(h * w)) - log_so3(r * exp_so3(-h * w))) / (2.0 * h);
    const Vec3 an = axis_angle_jacobian(x) * w;
    worst = std::max(worst, (fd - an).norm() / an.norm());
  }
  for (ParamKind kind : Parameterization::all()) {
    const Parameterization p(kind);
    const double radius = 0.9 * p.injectivity_radius();
    for (int k = 0; k < states; ++k) {
      const Mat3 r = sample_rotation_ball(radius, rng);
      const Vec3 y = to_param(r, p);
      const Vec3 w = rng.unit_vector();
      const Vec3 fd =
          (to_param(r * exp_so3(h * w), p) - to_param(r * exp_so3(-h * w), p)) / (2.0 * h);
      const Vec3 an = param_jacobian(y, p) * w;
      worst = std::max(worst, (fd - an).norm() / an.norm());
    }
  }
  CheckResult res;
  res.name = "jacobian-fd";
  res.passed = worst <= 1e-5;
  res.detail =
      strf("worst Jacobian-vs-FD relative error %.2e at %d states per chart (tol 1e-5)", worst,
           states);
  return res;
}

CheckResult check_ball_invariance(std::uint64_t seed) {
  // Kinematic consensus speed scales with the edge weights; weight 20 at a
  // 1 kHz hold keeps the discrete step w*dt*sup|g'| = 0.4 stable for the
  // stiffest chart while reaching the 1e-3 target well before the horizon.
  // Neither phase graph is strongly connected on its own (the front never
  // reaches agents 3-4, the back leaves agent 0 silent) but the union is,
  // and the front's internal 3-cycle avoids parking whole groups on a
  // frozen root, which would otherwise excite a slowly-decaying lag wave.
  const Digraph front = Digraph::from_edges(5, {{0, 1}, {1, 2}, {2, 0}, {3, 0}}, 20.0);
  const Digraph back = Digraph::from_edges(5, {{2, 3}, {3, 4}, {4, 0}}, 20.0);
  const int per_kind = 50;
  int total = 0, invariant = 0, converged = 0;
  double worst_err = 0.0;
  int kind_idx = 0;
  for (ParamKind kind : Parameterization::all()) {
    TrialConfig cfg;
    cfg.n = 5;
    cfg.laws = parse_law_set("rot_abs");
    cfg.param = kind;
    cfg.horizon = 30.0;
    cfg.sample_rate = 1000.0;
    cfg.init.rotation_radius = 0.9 * Parameterization(kind).injectivity_radius();
    cfg.init.translation = InitSpec::Translation::Zero;
    cfg.schedule.kind = ScheduleSpec::Kind::Alternating;
    cfg.schedule.period = 0.1;
    cfg.schedule.graphs = {front, back};
    for (int t = 0; t < per_kind; ++t) {
      cfg.seed = child(seed, std::uint64_t(100 * kind_idx + t));
      const Trace tr = run_trial(cfg);
      ++total;
      if (tr.diverged) continue;
      const std::vector<double> angles = sample_series(tr, max_rotation_norm);
      if (within_bound(angles, angles.front(), invariance_slack(tr))) ++invariant;
      const double err = rotation_consensus_error(tr.last());
      worst_err = std::max(worst_err, err);
      if (err < 1e-3) ++converged;
    }
    ++kind_idx;
  }
  CheckResult res;
  res.name = "ball-invariance-strong-switching";
  res.passed = invariant == total && converged == total;
  res.detail = strf("%d/%d trials ball-invariant, %d/%d converged, worst final error %.2e",
                    invariant, total, converged, total, worst_err);
  return res;
}

CheckResult check_qsc_convergence(std::uint64_t seed) {
  const int per_kind = 50;
  int total = 0, converged = 0;
  double worst_err = 0.0;
  int kind_idx = 0;
  for (ParamKind kind : Parameterization::all()) {
    TrialConfig cfg;
    cfg.n = 5;
    cfg.laws = parse_law_set("rot_rel");
    cfg.param = kind;
    cfg.horizon = 30.0;
    cfg.init.rotation_radius = 0.45 * Parameterization(kind).injectivity_radius();
    cfg.init.translation = InitSpec::Translation::Zero;
    cfg.schedule.kind = ScheduleSpec::Kind::RandomSwitching;
    cfg.schedule.period = 0.1;
    for (int t = 0; t < per_kind; ++t) {
      cfg.seed = child(seed, std::uint64_t(100 * kind_idx + t));
      const Trace tr = run_trial(cfg);
      ++total;
      if (tr.diverged) continue;
      const double err = rotation_consensus_error(tr.last());
      worst_err = std::max(worst_err, err);
      if (err < 1e-3) ++converged;
    }
    ++kind_idx;
  }
  // Negative control: a permanently split topology must keep a visible gap.
  TrialConfig split;
  split.n = 5;
  split.laws = parse_law_set("rot_rel");
  split.horizon = 30.0;
  split.init.rotation_radius = 0.45 * kPi;
  split.init.translation = InitSpec::Translation::Zero;
  split.schedule.kind = ScheduleSpec::Kind::Disconnected;
  int plateaued = 0;
  const int controls = 5;
  double worst_gap = std::numeric_limits<double>::infinity();
  for (int t = 0; t < controls; ++t) {
    split.seed = child(seed, std::uint64_t(1000 + t));
    const Trace tr = run_trial(split);
    const double err = rotation_consensus_error(tr.last());
    worst_gap = std::min(worst_gap, err);
    if (err > 1e-2) ++plateaued;
  }
  CheckResult res;
  res.name = "qsc-convergence";
  res.passed = converged == total && plateaued == controls;
  res.detail = strf("%d/%d converged (worst %.2e); split control gap %.2e in %d/%d runs",
                    converged, total, worst_err, worst_gap, plateaued, controls);
  return res;
}

CheckResult check_cone_membership(std::uint64_t seed) {
  const std::vector<Digraph> graphs = {
      Digraph::from_edges(3, {{1, 0}, {2, 1}}, 1.0),
      Digraph::from_edges(3, {{0, 2}, {1, 2}, {2, 1}}, 1.0),
  };
  double worst_fraction = 1.0;
  int total_tested = 0;
  int run = 0;
  for (ParamKind kind : Parameterization::all()) {
    const Parameterization p(kind);
    for (const Digraph& g : graphs) {
      TrialConfig cfg;
      cfg.n = 3;
      cfg.laws = parse_law_set("rot_rel");
      cfg.param = kind;
      cfg.horizon = 2.0;
      cfg.sample_rate = 1000.0;
      cfg.init.rotation_radius = 0.45 * p.injectivity_radius();
      cfg.init.translation = InitSpec::Translation::Zero;
      cfg.schedule.kind = ScheduleSpec::Kind::Fixed;
      cfg.schedule.fixed = g;
      cfg.seed = child(seed, std::uint64_t(40 + run));
      ++run;
      const Trace tr = run_trial(cfg);
      // The cone statement lives in Rodrigues coordinates tan(theta/2)u no
      // matter which chart the control law itself runs in.
      const Parameterization rod(ParamKind::Rodrigues);
      const int samples = int(tr.samples.size());
      std::vector<std::vector<Vec3>> z(samples, std::vector<Vec3>(3));
      for (int k = 0; k < samples; ++k)
        for (int i = 0; i < 3; ++i) z[k][i] = to_param(tr.samples[k][i].pose.R, rod);
      int tested = 0, inside = 0;
      for (int k = 1; k + 1 < samples; ++k) {
        for (int i = 0; i < 3; ++i) {
          const Vec3 zdot = (z[k + 1][i] - z[k - 1][i]) * (cfg.sample_rate / 2.0);
          if (zdot.norm() < 1e-9) continue;
          std::vector<Vec3> gens;
          for (int j : g.neighbors(i))
            if (j != i) gens.push_back(z[k][j] - z[k][i]);
          ++tested;
          if (cone_residual(gens, zdot) <= 1e-3) ++inside;
        }
      }
      total_tested += tested;
      if (tested > 0) worst_fraction = std::min(worst_fraction, double(inside) / tested);
    }
  }
  CheckResult res;
  res.name = "cone-membership";
  res.passed = worst_fraction >= 0.99;
  res.detail = strf("worst in-cone fraction %.4f across 10 trajectories (%d points, need 0.99)",
                    worst_fraction, total_tested);
  return res;
}

CheckResult check_farthest_pair_alignment(std::uint64_t seed) {
  Rng rng(seed);
  const int configs = 10000;
  const int n = 5;
  double min_alignment = std::numeric_limits<double>::infinity();
  for (ParamKind kind : Parameterization::all()) {
    const Parameterization p(kind);
    const double q = 0.45 * p.injectivity_radius();
    for (int k = 0; k < configs; ++k) {
      std::vector<Mat3> rots;
      rots.reserve(n);
      for (int i = 0; i < n; ++i) rots.push_back(sample_rotation_ball(q, rng));
      min_alignment = std::min(min_alignment, farthest_pair_alignment(rots, p));
    }
  }
  CheckResult res;
  res.name = "farthest-pair-alignment";
  res.passed = min_alignment >= -1e-12;
  res.detail = strf("minimum alignment %.2e over %d half-ball configurations per chart",
                    min_alignment, configs);
  return res;
}

CheckResult check_farthest_pair_sharpness(std::uint64_t seed) {
  Rng rng(seed);
  const int configs = 2000;
  const int n = 5;
  // Beyond the half radius the alignment property is no longer guaranteed.
  // Every chart except the sine map then shows genuine sign violations; the
  // sine map stays clean on its entire chart domain because the domain bound
  // itself (all pairwise angles below the injectivity radius) is what the
  // half-radius hypothesis buys for the other charts.
  bool ok = true;
  std::string parts;
  double min_alignment = std::numeric_limits<double>::infinity();
  for (ParamKind kind : Parameterization::all()) {
    const Parameterization p(kind);
    const double q = 0.75 * p.injectivity_radius();
    int violations = 0;
    int valid = 0;
    for (int k = 0; k < configs; ++k) {
      std::vector<Mat3> rots;
      rots.reserve(n);
      for (int i = 0; i < n; ++i) rots.push_back(sample_rotation_ball(q, rng));
      double a = 0.0;
      try {
        a = farthest_pair_alignment(rots, p);
      } catch (const Error&) {
        // The extremal pair left the chart domain entirely; skip, don't score.
        continue;
      }
      ++valid;
      min_alignment = std::min(min_alignment, a);
      if (a < -1e-9) ++violations;
    }
    const bool expect_violations = kind != ParamKind::SinMap;
    ok = ok && valid > 0 && (expect_violations ? violations > 0 : violations == 0);
    if (!parts.empty()) parts += ", ";
    parts += strf("%s %d/%d", std::string(p.name()).c_str(), violations, valid);
  }
  CheckResult res;
  res.name = "farthest-pair-sharpness";
  res.passed = ok;
  res.detail = strf("violations/valid beyond half radius: %s (most negative %.2e)", parts.c_str(),
                    min_alignment);
  return res;
}

CheckResult check_pairwise_rate_fit(std::uint64_t seed) {
  Rng rng(child(seed, 7001));
  const int runs = 5;
  bool all_ok = true;
  double worst_r2 = 1.0;
  double slowest = -std::numeric_limits<double>::infinity();
  for (int run = 0; run < runs; ++run) {
    // Random tournament: every unordered pair carries exactly one direction.
    Digraph g;
    g.n = 5;
    g.weights = MatX::Zero(5, 5);
    g.weights.diagonal().setOnes();
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j) {
        if (rng.flip())
          g.weights(i, j) = 1.0;
        else
          g.weights(j, i) = 1.0;
      }
    TrialConfig cfg;
    cfg.n = 5;
    cfg.laws = parse_law_set("rot_rel");
    cfg.horizon = 60.0;
    cfg.init.rotation_radius = 0.45 * kPi;
    cfg.init.translation = InitSpec::Translation::Zero;
    cfg.schedule.kind = ScheduleSpec::Kind::Fixed;
    cfg.schedule.fixed = g;
    cfg.seed = child(seed, std::uint64_t(300 + run));
    const Trace tr = run_trial(cfg);
    const std::vector<double> v = sample_series(tr, [](const std::vector<AgentState>& s) {
      const double e = rotation_consensus_error(s);
      return e * e;
    });
    const RateFit fit = fit_exponential_rate(tr.times, v, 1e-5, 1e-1);
    worst_r2 = std::min(worst_r2, fit.r_squared);
    slowest = std::max(slowest, fit.rate);
    all_ok = all_ok && fit.rate < 0.0 && fit.r_squared >= 0.99;
  }
  CheckResult res;
  res.name = "pairwise-rate-fit";
  res.passed = all_ok;
  res.detail = strf("log-linear decay on %d tournaments: worst R^2 %.4f, slowest rate %.3f", runs,
                    worst_r2, slowest);
  return res;
}

namespace {

/// Monte-Carlo batch of both first-order pose laws; returns one rate per law.
std::array<double, 2> first_law_rates(std::uint64_t seed, int threads, double radius,
                                      double noise, bool switching, double horizon, int trials,
                                      double tol) {
  std::array<double, 2> rates{};
  int law_idx = 0;
  for (const char* law : {"first_abs", "first_rel"}) {
    TrialConfig cfg;
    cfg.n = 5;
    cfg.laws = parse_law_set(law);
    cfg.horizon = horizon;
    cfg.noise = noise;
    cfg.init.rotation_radius = radius;
    if (switching) {
      cfg.schedule.kind = ScheduleSpec::Kind::RandomSwitching;
      cfg.schedule.period = 0.1;
    }
    cfg.seed = child(seed, std::uint64_t(law_idx));
    const McResult mc = monte_carlo_parallel(cfg, trials, consensus_judge(tol, tol), threads);
    rates[law_idx] = mc.success_rate();
    ++law_idx;
  }
  return rates;
}

}  // namespace

CheckResult check_mc_uniform(std::uint64_t seed, int threads) {
  const int trials = 200;
  const std::array<double, 2> rates =
      first_law_rates(seed, threads, kPi, 0.0, false, 1500.0, trials, 1e-3);
  CheckResult res;
  res.name = "mc-uniform-so3";
  res.passed = rates[0] >= 0.85 && rates[1] >= 0.85;
  res.detail = strf("uniform-attitude success rates %.3f / %.3f at %d trials per law (need 0.85)",
                    rates[0], rates[1], trials);
  return res;
}

CheckResult check_mc_halfpi(std::uint64_t seed, int threads) {
  const int trials = 200;
  const std::array<double, 2> rates =
      first_law_rates(seed, threads, kPi / 2.0, 0.0, false, 1500.0, trials, 1e-3);
  CheckResult res;
  res.name = "mc-halfpi-ball";
  res.passed = rates[0] == 1.0 && rates[1] == 1.0;
  res.detail = strf("half-pi-ball success rates %.3f / %.3f at %d trials per law (need 1.0)",
                    rates[0], rates[1], trials);
  return res;
}

CheckResult check_mc_noise_robustness(std::uint64_t seed, int threads) {
  const int trials = 100;
  const std::array<double, 2> rates =
      first_law_rates(seed, threads, kPi / 2.0, 0.1, true, 30.0, trials, 0.5);
  CheckResult res;
  res.name = "mc-noise-robustness";
  res.passed = rates[0] == 1.0 && rates[1] == 1.0;
  res.detail = strf("noisy switched success rates %.3f / %.3f at %d trials per law (need 1.0)",
                    rates[0], rates[1], trials);
  return res;
}

CheckResult check_translation_counterexample(std::uint64_t seed) {
  TrialConfig cfg;
  cfg.n = 3;
  cfg.laws = parse_law_set("trans_abs");
  cfg.horizon = 20.0;
  cfg.init.rotation = InitSpec::Rotation::FixedFlipZ;
  cfg.init.translation = InitSpec::Translation::PlanarBox;
  cfg.schedule.kind = ScheduleSpec::Kind::Fixed;
  cfg.schedule.fixed = Digraph::complete(3, 1.0);
  cfg.seed = child(seed, 1);
  const Trace tr = run_trial(cfg);
  const std::vector<double> total = sample_series(tr, [](const std::vector<AgentState>& s) {
    double sum = 0.0;
    for (const AgentState& a : s) sum += a.pose.T.squaredNorm();
    return std::sqrt(sum);
  });
  bool growing = true;
  for (std::size_t k = 0; k + 1 < total.size(); ++k)
    growing = growing && total[k + 1] >= total[k] - 1e-9 * std::max(1.0, total[k]);
  CheckResult res;
  res.name = "translation-counterexample";
  res.passed = tr.diverged && growing && total.back() > 1e6;
  res.detail = strf("diverged=%d, norm non-decreasing=%d, final total %.2e at t=%.1f",
                    int(tr.diverged), int(growing), total.back(), tr.end_time);
  return res;
}

CheckResult check_gain_bound_relative_torque(std::uint64_t seed) {
  const Parameterization p(ParamKind::SinMap);
  const double r = p.injectivity_radius();
  const double r1 = 0.2 * r;
  const double r2 = 0.4 * r;
  const double gain = 3.0;  // q * r2 / (r2 - r1) + margin with q = 1
  TrialConfig cfg;
  cfg.n = 4;
  cfg.laws = parse_law_set("torque_rel");
  cfg.param = ParamKind::SinMap;
  cfg.gain = gain;
  cfg.horizon = 8.0;
  cfg.init.rotation_radius = std::asin(r1);  // coordinate norm at most r1
  cfg.init.translation = InitSpec::Translation::Zero;
  cfg.init.omega = InitSpec::Velocity::ErrorBall;
  cfg.init.omega_radius = 0.2;
  cfg.schedule.kind = ScheduleSpec::Kind::Fixed;
  cfg.schedule.fixed = Digraph::from_edges(4, {{1, 0}, {2, 0}, {3, 0}}, 1.0);
  const int trials = 20;
  int bounded = 0, converged = 0, rate_ok = 0;
  double peak = 0.0, worst_rate = -gain, worst_err = 0.0;
  for (int t = 0; t < trials; ++t) {
    cfg.seed = child(seed, std::uint64_t(500 + t));
    const Trace tr = run_trial(cfg);
    const Digraph& g = tr.schedule.graphs[0];
    const std::vector<double> coords =
        sample_series(tr, [&](const std::vector<AgentState>& s) {
          double m = 0.0;
          for (const AgentState& a : s) m = std::max(m, to_param(a.pose.R, p).norm());
          return m;
        });
    peak = std::max(peak, *std::max_element(coords.begin(), coords.end()));
    if (within_bound(coords, r2, 1e-6)) ++bounded;
    const double err = rotation_consensus_error(tr.last());
    worst_err = std::max(worst_err, err);
    if (err < 1e-3) ++converged;
    const std::vector<double> u = rss_series(tr, [&](const std::vector<AgentState>& s, int i) {
      return relative_velocity_error(s, i, g, p);
    });
    const RateFit fit = fit_exponential_rate(tr.times, u, 1e-8, 1e-1);
    if (std::abs(fit.rate + gain) <= 0.01 * gain) ++rate_ok;
    if (std::abs(fit.rate + gain) > std::abs(worst_rate + gain)) worst_rate = fit.rate;
  }
  CheckResult res;
  res.name = "gain-bound-relative-torque";
  res.passed = bounded == trials && converged == trials && rate_ok == trials;
  res.detail =
      strf("%d/%d below 0.4r (peak %.3f of %.3f), %d/%d converged, worst fitted rate %.4f",
           bounded, trials, peak, r2, converged, trials, worst_rate);
  return res;
}

CheckResult check_regulation_energy_monotone(std::uint64_t seed) {
  TrialConfig cfg;
  cfg.n = 5;
  cfg.laws = parse_law_set("torque_abs");
  cfg.horizon = 25.0;
  cfg.init.rotation_radius = 0.5;
  cfg.init.translation = InitSpec::Translation::Zero;
  cfg.init.omega = InitSpec::Velocity::ErrorBall;
  cfg.init.omega_radius = 0.5;
  cfg.schedule.kind = ScheduleSpec::Kind::Fixed;
  cfg.schedule.fixed = Digraph::from_edges(
      5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {1, 0}, {2, 1}, {3, 2}, {4, 3}, {0, 4}}, 1.0);
  const int trials = 20;
  int monotone = 0, regulated = 0;
  double worst_final = 0.0;
  for (int t = 0; t < trials; ++t) {
    cfg.seed = child(seed, std::uint64_t(700 + t));
    const Trace tr = run_trial(cfg);
    const Digraph& g = tr.schedule.graphs[0];
    const std::vector<double> energy = sample_series(
        tr, [&](const std::vector<AgentState>& s) { return max_regulation_energy(s, g); });
    if (non_increasing(energy, 1e-9)) ++monotone;
    const double final_angle = max_rotation_norm(tr.last());
    worst_final = std::max(worst_final, final_angle);
    if (final_angle < 1e-3) ++regulated;
  }
  CheckResult res;
  res.name = "regulation-energy-monotone";
  res.passed = monotone == trials && regulated == trials;
  res.detail = strf("%d/%d energy non-increasing, %d/%d regulated (worst final angle %.2e)",
                    monotone, trials, regulated, trials, worst_final);
  return res;
}

CheckResult check_force_law_rates(std::uint64_t seed) {
  const double gain = 3.0;
  TrialConfig cfg;
  cfg.n = 4;
  cfg.laws = parse_law_set("force");
  cfg.gain = gain;
  cfg.horizon = 8.0;
  cfg.init.rotation_radius = 1.0;
  cfg.init.velocity = InitSpec::Velocity::ErrorBall;
  cfg.init.velocity_radius = 0.2;
  cfg.schedule.kind = ScheduleSpec::Kind::Fixed;
  cfg.schedule.fixed = Digraph::from_edges(4, {{1, 0}, {2, 0}, {3, 0}}, 1.0);
  const int trials = 20;
  int converged = 0, rate_ok = 0;
  double worst_err = 0.0, worst_rate = -gain;
  for (int t = 0; t < trials; ++t) {
    cfg.seed = child(seed, std::uint64_t(900 + t));
    const Trace tr = run_trial(cfg);
    const Digraph& g = tr.schedule.graphs[0];
    const double err = translation_consensus_error(tr.last());
    worst_err = std::max(worst_err, err);
    if (err < 1e-3) ++converged;
    const std::vector<double> u = rss_series(
        tr, [&](const std::vector<AgentState>& s, int i) { return force_velocity_error(s, i, g); });
    const RateFit fit = fit_exponential_rate(tr.times, u, 1e-8, 1e-1);
    if (std::abs(fit.rate + gain) <= 0.01 * gain) ++rate_ok;
    if (std::abs(fit.rate + gain) > std::abs(worst_rate + gain)) worst_rate = fit.rate;
  }
  CheckResult res;
  res.name = "force-law-rates";
  res.passed = converged == trials && rate_ok == trials;
  res.detail = strf("%d/%d translation consensus (worst %.2e), worst fitted rate %.4f (target -3)",
                    converged, trials, worst_err, worst_rate);
  return res;
}

CheckResult check_free_body_conservation(std::uint64_t seed) {
  TrialConfig cfg;
  cfg.n = 1;
  cfg.laws = parse_law_set("free");
  cfg.horizon = 10.0;
  cfg.init.rotation_radius = 3.0;
  cfg.init.translation = InitSpec::Translation::Zero;
  cfg.init.omega = InitSpec::Velocity::Ball;
  cfg.init.omega_radius = 1.0;
  cfg.schedule.kind = ScheduleSpec::Kind::Fixed;
  cfg.schedule.fixed = Digraph::complete(1, 1.0);
  AgentPhys ph;
  ph.inertia = Vec3(2.0, 2.0, 1.0).asDiagonal();
  cfg.phys = {ph};
  const int trials = 5;
  double worst_energy = 0.0, worst_momentum = 0.0;
  for (int t = 0; t < trials; ++t) {
    cfg.seed = child(seed, std::uint64_t(1100 + t));
    const Trace tr = run_trial(cfg);
    const AgentState& first = tr.samples.front()[0];
    const double e0 = first.omega.dot(ph.inertia * first.omega);
    const Vec3 pi0 = first.pose.R * (ph.inertia * first.omega);
    for (const std::vector<AgentState>& sample : tr.samples) {
      const AgentState& s = sample[0];
      const double e = s.omega.dot(ph.inertia * s.omega);
      const Vec3 pi = s.pose.R * (ph.inertia * s.omega);
      worst_energy = std::max(worst_energy, std::abs(e - e0) / e0);
      worst_momentum = std::max(worst_momentum, (pi - pi0).norm() / pi0.norm());
    }
  }
  CheckResult res;
  res.name = "free-body-conservation";
  res.passed = worst_energy <= 1e-6 && worst_momentum <= 1e-6;
  res.detail = strf("relative drift over 10 s: energy %.2e, world momentum %.2e (tol 1e-6)",
                    worst_energy, worst_momentum);
  return res;
}

std::vector<CheckResult> acceptance_checks(std::uint64_t seed, int threads,
                                           std::string_view filter) {
  std::vector<CheckResult> out;
  const auto add = [&](const char* name, auto&& run) {
    if (filter.empty() || filter == name) out.push_back(run());
  };
  add("roundtrips", [&] { return check_roundtrips(child(seed, 0)); });
  add("jacobian-fd", [&] { return check_jacobian_fd(child(seed, 1)); });
  add("ball-invariance-strong-switching", [&] { return check_ball_invariance(child(seed, 2)); });
  add("qsc-convergence", [&] { return check_qsc_convergence(child(seed, 3)); });
  add("cone-membership", [&] { return check_cone_membership(child(seed, 4)); });
  add("farthest-pair-alignment", [&] { return check_farthest_pair_alignment(child(seed, 5)); });
  add("pairwise-rate-fit", [&] { return check_pairwise_rate_fit(child(seed, 6)); });
  add("mc-uniform-so3", [&] { return check_mc_uniform(child(seed, 7), threads); });
  add("mc-halfpi-ball", [&] { return check_mc_halfpi(child(seed, 8), threads); });
  add("mc-noise-robustness", [&] { return check_mc_noise_robustness(child(seed, 9), threads); });
  add("translation-counterexample",
      [&] { return check_translation_counterexample(child(seed, 10)); });
  add("gain-bound-relative-torque",
      [&] { return check_gain_bound_relative_torque(child(seed, 11)); });
  add("regulation-energy-monotone",
      [&] { return check_regulation_energy_monotone(child(seed, 12)); });
  add("force-law-rates", [&] { return check_force_law_rates(child(seed, 13)); });
  add("free-body-conservation", [&] { return check_free_body_conservation(child(seed, 14)); });
  if (!filter.empty() && out.empty())
    throw ConfigInvalid("unknown check '" + std::string(filter) + "'");
  return out;
}

const std::vector<std::string>& check_suite_names() {
  static const std::vector<std::string> names = {"roundtrips", "invariance", "lemma1",
                                                 "cone",       "rates",      "all"};
  return names;
}

std::vector<CheckResult> run_check_suite(std::string_view suite, std::uint64_t seed, int threads) {
  if (suite == "roundtrips")
    return {check_roundtrips(child(seed, 0)), check_jacobian_fd(child(seed, 1))};
  if (suite == "invariance")
    return {check_ball_invariance(child(seed, 2)), check_qsc_convergence(child(seed, 3))};
  if (suite == "lemma1")
    return {check_farthest_pair_alignment(child(seed, 5)),
            check_farthest_pair_sharpness(child(seed, 15))};
  if (suite == "cone") return {check_cone_membership(child(seed, 4))};
  if (suite == "rates")
    return {check_pairwise_rate_fit(child(seed, 6)),
            check_gain_bound_relative_torque(child(seed, 11)),
            check_force_law_rates(child(seed, 13))};
  if (suite == "all") {
    std::vector<CheckResult> out = acceptance_checks(seed, threads);
    out.push_back(check_farthest_pair_sharpness(child(seed, 15)));
    return out;
  }
  throw ConfigInvalid("unknown check suite '" + std::string(suite) +
                      "' (roundtrips, invariance, lemma1, cone, rates, all)");
}

}  // namespace sesim
