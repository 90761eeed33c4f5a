#include "sesim/analysis.hpp"

#include "sesim/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace sesim {

namespace {

constexpr double kTimeSlop = 1e-12;

/// Geodesic distance with the antipodal case mapped to its limit value pi.
double pair_distance(const Mat3& a, const Mat3& b) {
  try {
    return geodesic_distance(a, b);
  } catch (const AntipodalRotation&) {
    return std::numbers::pi;
  }
}

/// Relative rotations R_i^T R_j for every neighbor j of i (identity
/// elsewhere), matching what the laws consume.
std::vector<Mat3> relative_rotations(const std::vector<AgentState>& sample, int i,
                                     const Digraph& g) {
  const int n = int(sample.size());
  std::vector<Mat3> rel(n, Mat3::Identity());
  for (int j = 0; j < n; ++j)
    if (g.weights(i, j) > 0.0)
      rel[j] = (sample[i].pose.R.transpose() * sample[j].pose.R).eval();
  return rel;
}

}  // namespace

double rotation_consensus_error(const std::vector<AgentState>& sample) {
  double worst = 0.0;
  const int n = int(sample.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      worst = std::max(worst, pair_distance(sample[i].pose.R, sample[j].pose.R));
  return worst;
}

double translation_consensus_error(const std::vector<AgentState>& sample) {
  if (sample.empty()) return 0.0;
  Vec3 mean = Vec3::Zero();
  for (const auto& s : sample) mean += s.pose.T;
  mean /= double(sample.size());
  double sq = 0.0;
  for (const auto& s : sample) sq += (s.pose.T - mean).squaredNorm();
  return std::sqrt(sq);
}

double max_rotation_norm(const std::vector<AgentState>& sample) {
  double worst = 0.0;
  for (const auto& s : sample)
    worst = std::max(worst, pair_distance(s.pose.R, Mat3::Identity()));
  return worst;
}

std::vector<double> sample_series(
    const Trace& tr, const std::function<double(const std::vector<AgentState>&)>& fn) {
  std::vector<double> out;
  out.reserve(tr.samples.size());
  for (const auto& sample : tr.samples) out.push_back(fn(sample));
  return out;
}

bool within_bound(const std::vector<double>& values, double bound, double slack) {
  for (double v : values)
    if (v > bound + slack) return false;
  return true;
}

bool non_increasing(const std::vector<double>& values, double slack) {
  for (std::size_t k = 1; k < values.size(); ++k)
    if (values[k] > values[k - 1] + slack) return false;
  return true;
}

Vec3 absolute_velocity_error(const std::vector<AgentState>& sample, int i,
                             const Digraph& g) {
  std::vector<Mat3> seen(sample.size());
  for (std::size_t j = 0; j < sample.size(); ++j) seen[j] = sample[j].pose.R;
  return omega_bar_absolute(seen, sample[i].omega, i, g);
}

Vec3 relative_velocity_error(const std::vector<AgentState>& sample, int i,
                             const Digraph& g, const Parameterization& p) {
  return omega_bar_relative(relative_rotations(sample, i, g), sample[i].omega, i, g, p);
}

Vec3 force_velocity_error(const std::vector<AgentState>& sample, int i,
                          const Digraph& g) {
  const int n = int(sample.size());
  std::vector<Vec3> rel(n, Vec3::Zero());
  for (int j = 0; j < n; ++j)
    if (g.weights(i, j) > 0.0)
      rel[j] = sample[i].pose.R.transpose() * (sample[j].pose.T - sample[i].pose.T);
  return velocity_bar(rel, sample[i].v, i, g);
}

double regulation_energy(const std::vector<AgentState>& sample, int i,
                         const Digraph& g) {
  const Vec3 x = log_so3(sample[i].pose.R);
  return x.squaredNorm() + absolute_velocity_error(sample, i, g).squaredNorm();
}

double max_regulation_energy(const std::vector<AgentState>& sample, const Digraph& g) {
  if (g.n != int(sample.size()))
    throw ConfigInvalid("regulation energy: sample and graph disagree on the team size");
  double worst = 0.0;
  for (int i = 0; i < int(sample.size()); ++i)
    worst = std::max(worst, regulation_energy(sample, i, g));
  return worst;
}

double weighted_regulation_energy(const std::vector<AgentState>& sample,
                                  const Digraph& g) {
  return weighted_regulation_energy(sample, g, left_perron_weights(g));
}

double weighted_regulation_energy(const std::vector<AgentState>& sample,
                                  const Digraph& g, const VecX& perron) {
  const int n = int(sample.size());
  if (g.n != n || perron.size() != n)
    throw ConfigInvalid(
        "regulation energy: sample, graph, and weights disagree on the team size");
  double v = 0.0;
  for (int i = 0; i < n; ++i) v += perron(i) * regulation_energy(sample, i, g);
  return v;
}

double invariance_slack(const Trace& tr) {
  double dt = 0.0;
  if (tr.times.size() > 1) dt = tr.times[1] - tr.times[0];
  double w = 0.0;
  for (const auto& sample : tr.samples)
    for (const auto& s : sample) w = std::max(w, s.omega.norm());
  return 1e-6 + dt * w;
}

RateFit fit_exponential_rate(const std::vector<double>& times,
                             const std::vector<double>& values, double lo, double hi) {
  if (times.size() != values.size())
    throw ConfigInvalid("rate fit: times and values must have equal length");
  if (!(lo > 0.0)) throw NonPositiveValue("rate fit: band must be positive");
  if (hi < lo) throw ConfigInvalid("rate fit: band is empty");

  std::vector<double> t, l;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] < lo || values[k] > hi) continue;
    t.push_back(times[k]);
    l.push_back(std::log(values[k]));
  }
  if (t.size() < 2)
    throw ConfigInvalid("rate fit: fewer than two samples inside the band");

  const double m = double(t.size());
  double mt = 0.0, ml = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    mt += t[k];
    ml += l[k];
  }
  mt /= m;
  ml /= m;
  double stt = 0.0, stl = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    stt += (t[k] - mt) * (t[k] - mt);
    stl += (t[k] - mt) * (l[k] - ml);
  }
  if (!(stt > 0.0)) throw ConfigInvalid("rate fit: samples share one time instant");

  RateFit fit;
  fit.points = int(t.size());
  fit.rate = stl / stt;
  fit.intercept = ml - fit.rate * mt;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double e = l[k] - (fit.intercept + fit.rate * t[k]);
    ss_res += e * e;
    ss_tot += (l[k] - ml) * (l[k] - ml);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res > 0.0 ? 0.0 : 1.0);
  return fit;
}

RateFit fit_exponential_rate(const std::vector<double>& times,
                             const std::vector<double>& values) {
  for (double v : values)
    if (!(v > 0.0)) throw NonPositiveValue("rate fit: every value must be positive");
  const double hi = values.empty() ? 1.0 : *std::max_element(values.begin(), values.end());
  const double lo = values.empty() ? 1.0 : *std::min_element(values.begin(), values.end());
  return fit_exponential_rate(times, values, lo, hi);
}

VecX nnls(const MatX& a, const VecX& b, double tol) {
  const int m = int(a.cols());
  VecX x = VecX::Zero(m);
  if (m == 0) return x;
  const double thresh =
      tol * std::max(1.0, (a.transpose() * b).lpNorm<Eigen::Infinity>());
  std::vector<char> passive(m, 0);

  // Least squares restricted to the passive columns, zero elsewhere.
  const auto solve_passive = [&]() {
    std::vector<int> cols;
    for (int i = 0; i < m; ++i)
      if (passive[i]) cols.push_back(i);
    MatX sub(a.rows(), int(cols.size()));
    for (int c = 0; c < int(cols.size()); ++c) sub.col(c) = a.col(cols[c]);
    VecX zs = sub.colPivHouseholderQr().solve(b);
    VecX z = VecX::Zero(m);
    for (int c = 0; c < int(cols.size()); ++c) z(cols[c]) = zs(c);
    return z;
  };

  for (int outer = 0; outer < 3 * m + 30; ++outer) {
    const VecX w = a.transpose() * (b - a * x);
    int enter = -1;
    double best = thresh;
    for (int i = 0; i < m; ++i) {
      if (!passive[i] && w(i) > best) {
        best = w(i);
        enter = i;
      }
    }
    if (enter < 0) break;  // dual feasible: x is optimal
    passive[enter] = 1;

    for (int inner = 0; inner < 3 * m + 30; ++inner) {
      const VecX z = solve_passive();
      double zmin = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i)
        if (passive[i]) zmin = std::min(zmin, z(i));
      if (zmin > 0.0) {
        x = z;
        break;
      }
      // Step toward z until the first passive coordinate hits zero.
      double alpha = 1.0;
      for (int i = 0; i < m; ++i)
        if (passive[i] && z(i) <= 0.0 && x(i) - z(i) > 0.0)
          alpha = std::min(alpha, x(i) / (x(i) - z(i)));
      for (int i = 0; i < m; ++i)
        if (passive[i]) x(i) += alpha * (z(i) - x(i));
      const double floor = 1e-14 * std::max(1.0, x.lpNorm<Eigen::Infinity>());
      for (int i = 0; i < m; ++i) {
        if (passive[i] && x(i) <= floor) {
          passive[i] = 0;
          x(i) = 0.0;
        }
      }
    }
  }
  return x;
}

double cone_residual(const std::vector<Vec3>& generators, const Vec3& target) {
  const double tn = target.norm();
  if (tn == 0.0) return 0.0;
  MatX a(3, int(generators.size()));
  for (int c = 0; c < int(generators.size()); ++c) a.col(c) = generators[c];
  const VecX x = nnls(a, target);
  return (a * x - target).norm() / tn;
}

double farthest_pair_alignment(const std::vector<Mat3>& rots,
                               const Parameterization& p) {
  const int n = int(rots.size());
  if (n < 2)
    throw ConfigInvalid("alignment certificate needs at least two agents");

  int bi = 0, bj = 1;
  double worst = -1.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = pair_distance(rots[i], rots[j]);
      if (d > worst) {
        worst = d;
        bi = i;
        bj = j;
      }
    }
  }

  double out = 0.0;
  bool first = true;
  for (int swap = 0; swap < 2; ++swap) {
    const int i = swap ? bj : bi;
    const int j = swap ? bi : bj;
    const Vec3 xij = log_so3((rots[i].transpose() * rots[j]).eval());
    for (int k = 0; k < n; ++k) {
      const Vec3 yik = to_param((rots[i].transpose() * rots[k]).eval(), p);
      const double d = xij.dot(yik);
      if (first || d < out) {
        out = d;
        first = false;
      }
    }
  }
  return out;
}

bool is_uniformly_connected(const GraphTimeline& tl, double horizon, double window,
                            Connectivity mode) {
  if (tl.times.empty() || tl.graphs.size() != tl.times.size())
    throw ConfigInvalid("uniform connectivity: malformed timeline");
  if (!(window > 0.0) || window > horizon + kTimeSlop)
    throw ConfigInvalid(
        "uniform connectivity: window must be positive and fit the horizon");
  const auto connected = [mode](const Digraph& g) {
    return mode == Connectivity::Strong ? is_strongly_connected(g)
                                        : is_quasi_strongly_connected(g);
  };
  for (double t : tl.times) {
    if (t + window > horizon + kTimeSlop) break;
    if (!connected(tl.union_over(t, t + window))) return false;
  }
  return true;
}

AttractivityReport certify_uniform_attractivity(
    const TrialConfig& base, const std::vector<Digraph>& cycle, double interval,
    const std::vector<double>& phases, double eps,
    const std::function<double(const std::vector<AgentState>&)>& error_fn) {
  if (cycle.empty()) throw ConfigInvalid("attractivity: cycle must be nonempty");
  if (!(interval > 0.0)) throw ConfigInvalid("attractivity: interval must be positive");
  if (phases.empty()) throw ConfigInvalid("attractivity: need at least one phase");
  if (!(eps > 0.0)) throw NonPositiveValue("attractivity: eps must be positive");
  for (const Digraph& g : cycle) {
    validate_digraph(g);
    if (g.n != base.n)
      throw ConfigInvalid("attractivity: cycle graphs must match the team size");
  }

  // One experiment, one weight table: the union of the cycle's weights.
  Digraph table = cycle[0];
  for (std::size_t k = 1; k < cycle.size(); ++k) table = union_graphs(table, cycle[k]);
  const int m = int(cycle.size());

  AttractivityReport rep;
  rep.phases = phases;
  double lo_reached = std::numeric_limits<double>::infinity();
  double hi_reached = 0.0;

  for (double phase : phases) {
    if (phase < 0.0) throw ConfigInvalid("attractivity: phases must be nonnegative");
    double into = std::fmod(phase, interval);
    if (into > interval - kTimeSlop) into = 0.0;
    const double first = into <= kTimeSlop ? interval : interval - into;

    // Rotate the cycle: the graph active at trial time t is the one the
    // unshifted pattern shows at time phase + t.
    const auto index_at = [&](double t) {
      const long long k = (long long)(std::floor((phase + t) / interval + kTimeSlop));
      return int(((k % m) + m) % m);
    };
    std::vector<ScheduleRecord> records;
    std::vector<double> marks = {0.0};
    for (double t = first; t < base.horizon - kTimeSlop; t += interval)
      marks.push_back(t);
    for (double t : marks) {
      const Digraph& g = cycle[index_at(t)];
      for (int i = 0; i < base.n; ++i) records.push_back({i, t, g.neighbors(i)});
    }

    TrialConfig cfg = base;
    cfg.schedule = ScheduleSpec{};
    cfg.schedule.kind = ScheduleSpec::Kind::Explicit;
    cfg.schedule.explicit_schedule = SwitchingSchedule::from_records(
        base.n, table.weights, records, std::min(first, interval), 0.0, base.horizon);

    const Trace tr = run_trial(cfg);
    const std::vector<double> err = sample_series(tr, error_fn);

    double tte = std::numeric_limits<double>::infinity();
    if (!err.empty() && !(err.back() > eps)) {
      std::size_t k = err.size();
      while (k > 0 && !(err[k - 1] > eps)) --k;
      tte = tr.times[k];  // first sample from which the error stays at or below eps
    }
    rep.time_to_eps.push_back(tte);
    if (std::isfinite(tte)) {
      lo_reached = std::min(lo_reached, tte);
      hi_reached = std::max(hi_reached, tte);
    } else {
      ++rep.unreached;
    }
  }
  if (rep.unreached < int(rep.phases.size())) {
    rep.max_time = hi_reached;
    rep.spread = hi_reached - lo_reached;
  }
  return rep;
}

TrialJudge consensus_judge(double rot_tol, double trans_tol) {
  return [rot_tol, trans_tol](const Trace& tr) {
    TrialVerdict verdict;
    verdict.success = false;
    if (tr.samples.empty()) return verdict;
    verdict.rotation_error = rotation_consensus_error(tr.last());
    verdict.translation_error = translation_consensus_error(tr.last());
    verdict.success = !tr.diverged && verdict.rotation_error < rot_tol &&
                      verdict.translation_error < trans_tol;
    return verdict;
  };
}

}  // namespace sesim
