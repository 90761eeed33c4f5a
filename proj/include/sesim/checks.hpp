#pragma once

/// \file checks.hpp
/// Numerical certification suite: each check runs a self-contained experiment
/// certifying one documented property of the kernels, laws, or integrators,
/// and reports pass/fail with a one-line numeric detail. The acceptance
/// runner prints one line per check; the CLI groups them into named suites.
///
/// Checks are deterministic for a fixed seed. The `threads` argument only
/// affects wall time (Monte-Carlo batches are bit-identical across thread
/// counts).

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sesim {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Coordinate-chart certification: exp/log and all five parameterizations
/// invert each other to 1e-9 over 10^4 ball-interior samples per kind.
CheckResult check_roundtrips(std::uint64_t seed);

/// Kinematic Jacobians against central finite differences of the transition
/// maps: relative error <= 1e-5 at 10^3 states for the axis-angle rate
/// matrix and every coordinate Jacobian.
CheckResult check_jacobian_fd(std::uint64_t seed);

/// Absolute attitude law under uniformly strongly connected periodic
/// switching: the largest initial geodesic ball stays invariant (discrete
/// slack policy) and consensus is reached, 50 trials per parameterization.
CheckResult check_ball_invariance(std::uint64_t seed);

/// Relative attitude law under random quasi-strong switching from the
/// half-injectivity ball: all trials converge; a disconnected negative
/// control plateaus above 1e-2.
CheckResult check_qsc_convergence(std::uint64_t seed);

/// Along relative-law trajectories each agent's coordinate velocity stays in
/// the nonnegative cone of the neighbor coordinate differences (relative
/// residual <= 1e-3 on at least 99% of interior grid points).
CheckResult check_cone_membership(std::uint64_t seed);

/// Farthest-pair alignment is nonnegative over 10^4 random half-ball
/// configurations per parameterization.
CheckResult check_farthest_pair_alignment(std::uint64_t seed);

/// Negative control: beyond the half-injectivity radius the alignment
/// condition must fail for some configurations of every parameterization.
CheckResult check_farthest_pair_sharpness(std::uint64_t seed);

/// On a pairwise-covered (tournament) graph the squared consensus error of
/// the relative law decays log-linearly: R^2 >= 0.99 with negative slope
/// across the 1e-5..1e-1 band.
CheckResult check_pairwise_rate_fit(std::uint64_t seed);

/// First-order pose laws from uniform random attitudes under random
/// quasi-strong graphs: success rate >= 0.85 at 200 trials per law.
CheckResult check_mc_uniform(std::uint64_t seed, int threads);

/// Same laws started inside the half-pi geodesic ball: every one of 200
/// trials per law must converge.
CheckResult check_mc_halfpi(std::uint64_t seed, int threads);

/// Sampled control at 10 Hz, topology switching at 10 Hz, measurement noise
/// 0.1: all trials stay within noise-commensurate tolerances.
CheckResult check_mc_noise_robustness(std::uint64_t seed, int threads);

/// The attitude-blind absolute translation law with flipped attitudes on
/// planar positions: verdict diverged and total translation norm
/// non-decreasing at every recorded step.
CheckResult check_translation_counterexample(std::uint64_t seed);

/// Relative torque law gain bound: starting at coordinate radius 0.2r with
/// gain k = 3, trajectories stay below 0.4r, converge, and the backstepping
/// error decays at exactly rate -k (fitted within 1%).
CheckResult check_gain_bound_relative_torque(std::uint64_t seed);

/// Absolute torque regulation: the max agent energy ||x||^2 + ||wbar||^2 is
/// non-increasing along 20 trials on a fixed strong graph and the attitudes
/// reach the identity within 1e-3.
CheckResult check_regulation_energy_monotone(std::uint64_t seed);

/// Force law with frozen random attitudes: translation consensus below 1e-3
/// and the velocity error decays at exactly rate -k (fitted within 1%).
CheckResult check_force_law_rates(std::uint64_t seed);

/// Free rigid body with J = diag(2, 2, 1): kinetic energy and the world
/// angular momentum vector drift by at most 1e-6 relative over 10 s.
CheckResult check_free_body_conservation(std::uint64_t seed);

/// The full certification battery in documentation order (one entry per
/// acceptance line; excludes the sharpness negative control). A nonempty
/// filter selects the single check with that name.
std::vector<CheckResult> acceptance_checks(std::uint64_t seed, int threads,
                                           std::string_view filter = {});

/// Suite names for the CLI: roundtrips, invariance, lemma1, cone, rates, all.
const std::vector<std::string>& check_suite_names();

/// Runs one named suite. Throws ConfigInvalid for unknown suite names.
std::vector<CheckResult> run_check_suite(std::string_view suite, std::uint64_t seed, int threads);

}  // namespace sesim
