#include "sesim/topology.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sesim {

namespace {

constexpr double kTimeSlop = 1e-12;

/// Nodes reachable from start following edges (i, j), j in N_i.
std::vector<bool> reachable_from(const Digraph& g, int start, bool reversed) {
  std::vector<bool> seen(g.n, false);
  std::vector<int> stack = {start};
  seen[start] = true;
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    for (int j = 0; j < g.n; ++j) {
      const bool edge = reversed ? g.has_edge(j, i) : g.has_edge(i, j);
      if (edge && !seen[j]) {
        seen[j] = true;
        stack.push_back(j);
      }
    }
  }
  return seen;
}

bool all(const std::vector<bool>& v) {
  return std::all_of(v.begin(), v.end(), [](bool b) { return b; });
}

}  // namespace

Digraph Digraph::complete(int n, double w) {
  Digraph g;
  g.n = n;
  g.weights = MatX::Constant(n, n, w);
  return g;
}

Digraph Digraph::from_edges(int n, const std::vector<std::pair<int, int>>& edges,
                            double w) {
  Digraph g;
  g.n = n;
  g.weights = MatX::Zero(n, n);
  g.weights.diagonal().setOnes();
  for (const auto& [i, j] : edges) g.weights(i, j) = w;
  validate_digraph(g);
  return g;
}

std::vector<int> Digraph::neighbors(int i) const {
  std::vector<int> out;
  for (int j = 0; j < n; ++j) {
    if (has_edge(i, j)) out.push_back(j);
  }
  return out;
}

void validate_digraph(const Digraph& g) {
  if (g.n <= 0 || g.weights.rows() != g.n || g.weights.cols() != g.n) {
    throw ConfigInvalid("digraph: weight matrix must be n x n with n >= 1");
  }
  if (g.weights.minCoeff() < 0.0) {
    throw ConfigInvalid("digraph: weights must be nonnegative");
  }
  if (g.weights.diagonal().minCoeff() <= 0.0) {
    throw ConfigInvalid("digraph: every node needs a self-loop");
  }
}

Digraph union_graphs(const Digraph& a, const Digraph& b) {
  Digraph g;
  g.n = a.n;
  g.weights = a.weights.cwiseMax(b.weights);
  return g;
}

bool is_strongly_connected(const Digraph& g) {
  return all(reachable_from(g, 0, false)) && all(reachable_from(g, 0, true));
}

bool is_quasi_strongly_connected(const Digraph& g) {
  // c is a center when every node reaches it, i.e. the reversed search from
  // c covers the graph.
  for (int c = 0; c < g.n; ++c) {
    if (all(reachable_from(g, c, true))) return true;
  }
  return false;
}

MatX laplacian(const Digraph& g) {
  MatX a = g.weights;
  a.diagonal().setZero();
  MatX l = -a;
  l.diagonal() = a.rowwise().sum();
  return l;
}

VecX left_perron_weights(const Digraph& g) {
  if (!is_strongly_connected(g)) {
    throw NotStronglyConnected("left_perron_weights: graph is not strongly connected");
  }
  const MatX lt = laplacian(g).transpose();
  Eigen::FullPivLU<MatX> lu(lt);
  lu.setThreshold(1e-10);
  const MatX kernel = lu.kernel();
  if (kernel.cols() != 1) {
    throw NotStronglyConnected("left_perron_weights: laplacian kernel is not one-dimensional");
  }
  VecX xi = kernel.col(0);
  if (xi.sum() < 0) xi = -xi;
  xi /= xi.sum();
  if (xi.minCoeff() <= 0.0) {
    throw NotStronglyConnected("left_perron_weights: null vector is not positive");
  }
  return xi;
}

namespace {

/// Spanning in-tree toward a random root plus an independent fair-coin mask.
/// Returns per-edge draw counts: 0, 1, or 2 (tree edge also hit by the mask).
MatX random_qsc_counts(int n, Rng& rng) {
  if (n <= 0) throw ConfigInvalid("random graph: n must be positive");
  // Random labeling, then each node points at a parent among earlier labels,
  // so every node reaches label[0].
  std::vector<int> label(n);
  std::iota(label.begin(), label.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(label[i], label[rng.integer(i + 1)]);
  MatX counts = MatX::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const int parent = label[rng.integer(i)];
    counts(label[i], parent) += 1.0;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && rng.integer(2) == 1) counts(i, j) += 1.0;
    }
  }
  return counts;
}

}  // namespace

Digraph random_qsc_graph(int n, Rng& rng) {
  Digraph g;
  g.n = n;
  g.weights = random_qsc_counts(n, rng);
  g.weights.diagonal().setOnes();
  validate_digraph(g);
  return g;
}

Digraph random_qsc_edges(int n, const MatX& weight_table, Rng& rng) {
  if (weight_table.rows() != n || weight_table.cols() != n) {
    throw ConfigInvalid("random graph: weight table must be n x n");
  }
  const MatX counts = random_qsc_counts(n, rng);
  Digraph g;
  g.n = n;
  g.weights = (counts.array() > 0.0).select(weight_table, MatX::Zero(n, n));
  g.weights.diagonal() = weight_table.diagonal();
  validate_digraph(g);
  return g;
}

SwitchingSchedule SwitchingSchedule::constant(const Digraph& g, double t0,
                                              double horizon) {
  validate_digraph(g);
  if (!(horizon > t0)) throw ConfigInvalid("schedule: horizon must exceed t0");
  SwitchingSchedule s;
  s.n_ = g.n;
  s.t0_ = t0;
  s.horizon_ = horizon;
  s.dwell_ = horizon - t0;
  s.table_ = g.weights;
  s.timeline_.resize(g.n);
  for (int i = 0; i < g.n; ++i) s.timeline_[i].push_back({t0, g.neighbors(i)});
  return s;
}

SwitchingSchedule SwitchingSchedule::periodic(const std::vector<Digraph>& graphs,
                                              double interval, double t0,
                                              double horizon) {
  if (graphs.empty()) throw ConfigInvalid("schedule: graph list is empty");
  if (!(interval > 0)) throw ConfigInvalid("schedule: switching interval must be positive");
  if (!(horizon > t0)) throw ConfigInvalid("schedule: horizon must exceed t0");
  const int n = graphs[0].n;
  MatX table = MatX::Zero(n, n);
  for (const Digraph& g : graphs) {
    validate_digraph(g);
    if (g.n != n) throw ConfigInvalid("schedule: graphs must share the agent count");
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double w = g.weights(i, j);
        if (w == 0.0) continue;
        if (table(i, j) != 0.0 && table(i, j) != w) {
          throw ConfigInvalid("schedule: one edge carries two different weights");
        }
        table(i, j) = w;
      }
  }
  table.diagonal() = table.diagonal().cwiseMax(1.0);

  SwitchingSchedule s;
  s.n_ = n;
  s.t0_ = t0;
  s.horizon_ = horizon;
  s.dwell_ = interval;
  s.table_ = table;
  s.timeline_.resize(n);
  for (int k = 0;; ++k) {
    const double t = t0 + k * interval;  // no accumulated rounding
    if (t >= horizon - kTimeSlop) break;
    const Digraph& g = graphs[size_t(k) % graphs.size()];
    for (int i = 0; i < n; ++i) s.timeline_[i].push_back({t, g.neighbors(i)});
  }
  return s;
}

SwitchingSchedule SwitchingSchedule::from_records(
    int n, const MatX& weight_table, const std::vector<ScheduleRecord>& records,
    double dwell_floor, double t0, double horizon) {
  if (n <= 0) throw ConfigInvalid("schedule: n must be positive");
  if (!(horizon > t0)) throw ConfigInvalid("schedule: horizon must exceed t0");
  if (dwell_floor < 0) throw ConfigInvalid("schedule: dwell floor must be nonnegative");
  if (weight_table.rows() != n || weight_table.cols() != n ||
      weight_table.minCoeff() < 0 || weight_table.diagonal().minCoeff() <= 0) {
    throw ConfigInvalid("schedule: weight table must be n x n, nonnegative, positive diagonal");
  }

  SwitchingSchedule s;
  s.n_ = n;
  s.t0_ = t0;
  s.horizon_ = horizon;
  s.dwell_ = dwell_floor;
  s.table_ = weight_table;
  s.timeline_.resize(n);
  for (const ScheduleRecord& rec : records) {
    if (rec.agent < 0 || rec.agent >= n) {
      throw ConfigInvalid("schedule: record agent index out of range");
    }
    std::vector<int> nb = rec.neighbors;
    nb.push_back(rec.agent);  // self-loop is implicit in the record format
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    for (int j : nb) {
      if (j < 0 || j >= n) throw ConfigInvalid("schedule: neighbor index out of range");
      if (weight_table(rec.agent, j) <= 0.0) {
        throw ConfigInvalid("schedule: weight table has no positive entry for an active edge");
      }
    }
    s.timeline_[rec.agent].push_back({rec.time, std::move(nb)});
  }
  for (int i = 0; i < n; ++i) {
    auto& line = s.timeline_[i];
    std::sort(line.begin(), line.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (line.empty() || std::abs(line.front().first - t0) > kTimeSlop) {
      throw ConfigInvalid("schedule: every agent needs a record at t0");
    }
    for (size_t k = 1; k < line.size(); ++k) {
      if (line[k].first - line[k - 1].first < dwell_floor - kTimeSlop) {
        throw ConfigInvalid("schedule: consecutive switches violate the dwell floor");
      }
    }
    if (line.back().first > horizon + kTimeSlop) {
      throw ConfigInvalid("schedule: record time beyond the horizon");
    }
  }
  return s;
}

Digraph SwitchingSchedule::graph_at(double t) const {
  if (t < t0_ - kTimeSlop || t > horizon_ + kTimeSlop) {
    throw OutOfHorizon("schedule: query time outside [t0, horizon]");
  }
  Digraph g;
  g.n = n_;
  g.weights = MatX::Zero(n_, n_);
  for (int i = 0; i < n_; ++i) {
    const auto& line = timeline_[i];
    // Last record with time <= t (right-continuous convention).
    size_t k = 0;
    while (k + 1 < line.size() && line[k + 1].first <= t + kTimeSlop) ++k;
    for (int j : line[k].second) g.weights(i, j) = table_(i, j);
  }
  return g;
}

std::vector<double> SwitchingSchedule::switch_times() const {
  std::vector<double> times;
  for (const auto& line : timeline_) {
    for (const auto& [t, nb] : line) times.push_back(t);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [](double a, double b) { return std::abs(a - b) <= kTimeSlop; }),
              times.end());
  return times;
}

Digraph SwitchingSchedule::union_over(double t1, double t2) const {
  Digraph u = graph_at(t1);
  for (double t : switch_times()) {
    if (t > t1 + kTimeSlop && t < t2 - kTimeSlop) u = union_graphs(u, graph_at(t));
  }
  return u;
}

std::vector<ScheduleRecord> SwitchingSchedule::events() const {
  std::vector<ScheduleRecord> out;
  for (int i = 0; i < n_; ++i) {
    for (const auto& [t, nb] : timeline_[i]) out.push_back({i, t, nb});
  }
  std::sort(out.begin(), out.end(), [](const ScheduleRecord& a, const ScheduleRecord& b) {
    return a.time != b.time ? a.time < b.time : a.agent < b.agent;
  });
  return out;
}

bool is_uniformly_connected(const SwitchingSchedule& s, double window,
                            Connectivity mode) {
  if (!(window > 0) || s.t0() + window > s.horizon() + kTimeSlop) {
    throw ConfigInvalid("uniform connectivity: window must be positive and fit the horizon");
  }
  const auto connected = [mode](const Digraph& g) {
    return mode == Connectivity::Strong ? is_strongly_connected(g)
                                        : is_quasi_strongly_connected(g);
  };
  for (double a : s.switch_times()) {
    if (a + window > s.horizon() + kTimeSlop) break;
    if (!connected(s.union_over(a, a + window))) return false;
  }
  return true;
}

}  // namespace sesim
