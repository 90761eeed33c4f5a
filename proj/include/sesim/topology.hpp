#pragma once

/// \file topology.hpp
/// Directed interaction graphs and switching schedules.
///
/// Edge convention: (i, j) present means j is a neighbor of i, i.e. agent i
/// measures j, and a path "from i to j" follows such edges. Every node keeps
/// a self-loop; self weights never enter consensus differences or the
/// laplacian, but they do enter neighborhood weight sums, so they are part of
/// the data rather than an implementation detail.

#include "sesim/rng.hpp"
#include "sesim/types.hpp"

#include <vector>

namespace sesim {

/// Weighted digraph. weights(i, j) > 0 exactly when edge (i, j) exists;
/// the diagonal is positive (mandatory self-loops).
struct Digraph {
  int n = 0;
  MatX weights;

  /// Complete graph with uniform weight w (self-loops included).
  static Digraph complete(int n, double w = 1.0);
  /// Graph with the given off-diagonal edges at weight w plus self-loops at 1.
  static Digraph from_edges(int n, const std::vector<std::pair<int, int>>& edges,
                            double w = 1.0);

  bool has_edge(int i, int j) const { return weights(i, j) > 0.0; }
  /// Neighbor list of i in increasing order; always contains i.
  std::vector<int> neighbors(int i) const;
};

/// Throws ConfigInvalid on a malformed graph (shape, negative weights,
/// missing self-loops).
void validate_digraph(const Digraph& g);

/// Edge-set union; a shared edge keeps the larger weight.
Digraph union_graphs(const Digraph& a, const Digraph& b);

bool is_strongly_connected(const Digraph& g);
/// True when some node is reachable from every node (a center).
bool is_quasi_strongly_connected(const Digraph& g);

/// L = D - A with D the diagonal of row sums; self-loops cancel exactly.
MatX laplacian(const Digraph& g);

/// Positive left null vector of the laplacian, normalized to sum 1.
/// The symmetric part of diag(xi) L is then positive semidefinite.
/// Throws NotStronglyConnected when no such vector exists.
VecX left_perron_weights(const Digraph& g);

/// Random quasi-strongly connected graph: a spanning in-tree toward a random
/// root plus an independent fair-coin mask, so entries land in {0, 1, 2};
/// the diagonal is forced to 1.
Digraph random_qsc_graph(int n, Rng& rng);

/// Same edge construction, but weights are read off a fixed master table
/// (used by switching schedules so one experiment has one weight table).
Digraph random_qsc_edges(int n, const MatX& weight_table, Rng& rng);

enum class Connectivity { Strong, QuasiStrong };

/// One change point of one agent's neighborhood.
struct ScheduleRecord {
  int agent = 0;
  double time = 0.0;
  std::vector<int> neighbors;
};

/// Piecewise-constant neighborhoods, right-continuous in time, one switching
/// signal per agent, with a common dwell floor and one master weight table.
class SwitchingSchedule {
 public:
  SwitchingSchedule() = default;

  /// Time-invariant graph over [t0, horizon].
  static SwitchingSchedule constant(const Digraph& g, double t0, double horizon);

  /// All agents cycle through the given graphs together, holding each for
  /// one interval. The weight table is the union of the graph weights;
  /// conflicting positive weights for one edge are rejected.
  static SwitchingSchedule periodic(const std::vector<Digraph>& graphs,
                                    double interval, double t0, double horizon);

  /// General per-agent records. Every agent needs a record at t0; per-agent
  /// gaps must reach the dwell floor (up to 1e-12 slop).
  static SwitchingSchedule from_records(int n, const MatX& weight_table,
                                        const std::vector<ScheduleRecord>& records,
                                        double dwell_floor, double t0, double horizon);

  int n() const { return n_; }
  double t0() const { return t0_; }
  double horizon() const { return horizon_; }
  double dwell_floor() const { return dwell_; }
  const MatX& weight_table() const { return table_; }

  /// Graph active at time t; throws OutOfHorizon outside [t0, horizon].
  Digraph graph_at(double t) const;

  /// Merged, sorted, de-duplicated change times (t0 included).
  std::vector<double> switch_times() const;

  /// Edge-set union of the graphs active on [t1, t2).
  Digraph union_over(double t1, double t2) const;

  /// All per-agent records ordered by time (the trace event log source).
  std::vector<ScheduleRecord> events() const;

 private:
  int n_ = 0;
  double t0_ = 0.0;
  double horizon_ = 0.0;
  double dwell_ = 0.0;
  MatX table_;
  // Per agent: (change time, neighbor list) in increasing time order.
  std::vector<std::vector<std::pair<double, std::vector<int>>>> timeline_;
};

/// Checks the union graph over [a, a + window) at every anchor (t0 and each
/// switch time with the window inside the horizon). Unions are piecewise
/// constant between anchors, so anchor checking is exact.
/// Throws ConfigInvalid when the window does not fit the horizon at all.
bool is_uniformly_connected(const SwitchingSchedule& s, double window,
                            Connectivity mode);

}  // namespace sesim
