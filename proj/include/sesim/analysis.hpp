#pragma once

/// \file analysis.hpp
/// Trace post-processing: consensus errors, invariance and monotonicity
/// scans, Lyapunov values, exponential-rate fits, nonnegative least squares
/// for cone-membership checks, the farthest-pair alignment certificate, and
/// uniform-connectivity certification of realized graph timelines.

#include "sesim/simulator.hpp"
#include "sesim/so3.hpp"
#include "sesim/topology.hpp"
#include "sesim/types.hpp"

#include <functional>
#include <vector>

namespace sesim {

/// Largest pairwise geodesic distance between agent attitudes. An antipodal
/// pair contributes pi, so the value is defined for every configuration.
double rotation_consensus_error(const std::vector<AgentState>& sample);

/// Root-sum-square distance of agent positions from their centroid.
double translation_consensus_error(const std::vector<AgentState>& sample);

/// Largest geodesic distance from the identity attitude over the team.
double max_rotation_norm(const std::vector<AgentState>& sample);

/// Values of fn at every recorded sample.
std::vector<double> sample_series(
    const Trace& tr, const std::function<double(const std::vector<AgentState>&)>& fn);

/// True when every value stays at or below bound + slack.
bool within_bound(const std::vector<double>& values, double bound, double slack);

/// True when the sequence never rises by more than slack between samples.
bool non_increasing(const std::vector<double>& values, double slack);

/// Velocity error of the absolute torque law recomputed from a sample:
/// omega_i - sum_j a_ij (x_j - x_i) in axis-angle coordinates.
Vec3 absolute_velocity_error(const std::vector<AgentState>& sample, int i,
                             const Digraph& g);

/// Velocity error of the relative torque law recomputed from a sample:
/// omega_i - sum_j a_ij y_ij.
Vec3 relative_velocity_error(const std::vector<AgentState>& sample, int i,
                             const Digraph& g, const Parameterization& p);

/// Velocity error of the force law recomputed from a sample:
/// v_i - sum_j a_ij T_ij.
Vec3 force_velocity_error(const std::vector<AgentState>& sample, int i,
                          const Digraph& g);

/// Regulation energy of one agent under the absolute torque law:
/// |x_i|^2 + |omega_bar_i|^2.
double regulation_energy(const std::vector<AgentState>& sample, int i,
                         const Digraph& g);

/// max_i regulation_energy: non-increasing along closed-loop trajectories of
/// the absolute torque law (at the maximizing agent, the energy derivative is
/// at most -d_i |omega_bar_i|^2).
double max_regulation_energy(const std::vector<AgentState>& sample, const Digraph& g);

/// Perron-weighted total sum_i xi_i regulation_energy, also non-increasing;
/// needs a strongly connected graph. The two-argument form computes the
/// Perron weights from the graph.
double weighted_regulation_energy(const std::vector<AgentState>& sample,
                                  const Digraph& g);
double weighted_regulation_energy(const std::vector<AgentState>& sample,
                                  const Digraph& g, const VecX& perron);

/// Discretization allowance for sampled invariance checks:
/// 1e-6 + dt * max recorded |omega|, with dt the trace sample interval.
double invariance_slack(const Trace& tr);

/// Least-squares line fit of log(values) against times, restricted to samples
/// with lo <= value <= hi. Throws NonPositiveValue when lo is not positive,
/// ConfigInvalid when the band is empty, sizes mismatch, or fewer than two
/// samples qualify.
struct RateFit {
  double rate = 0.0;       ///< slope per unit time
  double intercept = 0.0;  ///< log-value at time zero
  double r_squared = 0.0;
  int points = 0;
};
RateFit fit_exponential_rate(const std::vector<double>& times,
                             const std::vector<double>& values, double lo, double hi);

/// Unrestricted fit over every sample; every value must be positive or
/// NonPositiveValue is thrown.
RateFit fit_exponential_rate(const std::vector<double>& times,
                             const std::vector<double>& values);

/// Nonnegative least squares: minimizes |a x - b| subject to x >= 0 with an
/// active-set method. tol sets the dual-feasibility threshold (relative to
/// the largest gradient entry).
VecX nnls(const MatX& a, const VecX& b, double tol = 1e-10);

/// Relative residual of projecting target onto the cone spanned by the
/// generators with nonnegative coefficients: |A x* - target| / |target|
/// (zero for the zero target). Zero means the target lies in the cone.
double cone_residual(const std::vector<Vec3>& generators, const Vec3& target);

/// Farthest-pair alignment certificate: over the pair (i, j) with the largest
/// geodesic distance, returns the smallest value of dot(x_ij, y_ik) across
/// all agents k and both pair orientations, where x_ij is the relative
/// axis-angle vector and y_ik the relative coordinates under p. Nonnegative
/// values certify that the farthest-pair distance cannot grow.
double farthest_pair_alignment(const std::vector<Mat3>& rots,
                               const Parameterization& p);

/// Uniform-connectivity certificate for a realized timeline over [0, horizon]:
/// the union graph over every window [a, a + window) must satisfy the mode.
/// Anchoring at change points is exact for piecewise-constant timelines.
bool is_uniformly_connected(const GraphTimeline& tl, double horizon, double window,
                            Connectivity mode);

/// Judge that accepts a trial when it did not diverge and both consensus
/// errors at the final sample are below the tolerances.
TrialJudge consensus_judge(double rot_tol, double trans_tol);

/// Start-time sweep on a cyclic switching schedule. For each phase the cycle
/// is rotated so the trial begins mid-pattern, and the first time the error
/// drops to eps (and stays measurable on the sample grid) is recorded.
/// Uniform attractivity shows up as a bounded spread across phases.
struct AttractivityReport {
  std::vector<double> phases;
  std::vector<double> time_to_eps;  ///< +inf when never reached
  double max_time = 0.0;            ///< over the reached phases
  double spread = 0.0;              ///< max - min over the reached phases
  int unreached = 0;
};
AttractivityReport certify_uniform_attractivity(
    const TrialConfig& base, const std::vector<Digraph>& cycle, double interval,
    const std::vector<double>& phases, double eps,
    const std::function<double(const std::vector<AgentState>&)>& error_fn);

}  // namespace sesim
