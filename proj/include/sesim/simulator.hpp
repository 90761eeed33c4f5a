#pragma once

/// \file simulator.hpp
/// Trial configuration, trajectory integration, and Monte-Carlo batches.
///
/// Kinematic trials apply the commanded body twist with zero-order hold over
/// each sample interval and advance poses by the exact constant-twist step.
/// Dynamic trials integrate the rigid-body equations with a classical
/// Runge-Kutta scheme on the velocity states (controls recomputed at every
/// stage) and advance poses by one exact exponential of the Simpson-averaged
/// body twist per substep. The active graph is sampled at the start of each
/// step; measurement noise is drawn once per step and held across stages.

#include "sesim/controllers.hpp"
#include "sesim/rng.hpp"
#include "sesim/se3.hpp"
#include "sesim/topology.hpp"
#include "sesim/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sesim {

/// A trial's control selection: at most one attitude-moving and one
/// position-moving law of the same order. The first-order pose laws occupy
/// both slots; an empty set is a free rigid body (dynamic, zero inputs).
struct LawSet {
  std::optional<LawTag> rotation;
  std::optional<LawTag> translation;
};

/// Parse a law spec: a single tag ("rot_abs"), a '+'-combination of one
/// attitude and one position law ("torque_abs+force"), or "free".
/// Throws ConfigInvalid on unknown tags or inconsistent combinations.
LawSet parse_law_set(std::string_view spec);
std::string law_set_name(const LawSet& laws);
/// True when the trial integrates rigid-body dynamics (torque/force/free).
bool law_set_is_dynamic(const LawSet& laws);
void validate_law_set(const LawSet& laws);

struct AgentState {
  Pose pose;
  Vec3 omega = Vec3::Zero();  ///< body angular velocity / commanded twist part
  Vec3 v = Vec3::Zero();      ///< body linear velocity / commanded twist part
};

/// Initial state distribution. When explicit_states is nonempty it overrides
/// every other field (used by tests and hand-built experiments).
struct InitSpec {
  enum class Rotation { Identity, Ball, FixedFlipZ };
  Rotation rotation = Rotation::Ball;
  double rotation_radius = 1.0;  ///< geodesic ball radius (Ball mode)

  enum class Translation { Zero, Box, PlanarBox };
  Translation translation = Translation::Box;
  double box_size = 1.0;  ///< positions uniform over [0, box_size]^3

  /// ErrorBall centers the velocity at the value that zeroes the law's
  /// backstepping error and adds a uniform ball perturbation, so the error
  /// variable starts inside the given radius.
  enum class Velocity { Zero, Ball, ErrorBall };
  Velocity omega = Velocity::Zero;
  double omega_radius = 0.0;
  Velocity velocity = Velocity::Zero;
  double velocity_radius = 0.0;

  std::vector<AgentState> explicit_states;
};

/// Interaction topology over the trial.
struct ScheduleSpec {
  enum class Kind {
    Fixed,           ///< one given graph for the whole trial
    Explicit,        ///< a complete switching schedule
    RandomConstant,  ///< one random quasi-strong graph per trial
    RandomSwitching, ///< fresh random quasi-strong graph every period
    Alternating,     ///< cycle through the given graphs every period
    Disconnected,    ///< two complete blocks, never linked (negative control)
  };
  Kind kind = Kind::RandomConstant;
  Digraph fixed;                        // Fixed
  SwitchingSchedule explicit_schedule;  // Explicit
  std::vector<Digraph> graphs;          // Alternating
  double period = 0.1;                  // RandomSwitching / Alternating
};

struct AgentPhys {
  Mat3 inertia = Mat3::Identity();
  double mass = 1.0;
};

struct TrialConfig {
  int n = 4;
  LawSet laws;
  ParamKind param = ParamKind::AxisAngle;  ///< coordinates for rot_*/torque_rel
  double horizon = 30.0;
  double sample_rate = 10.0;  ///< sampling and kinematic control rate (Hz)
  double step = 1e-3;         ///< dynamic integrator substep
  double gain = 3.0;          ///< k in the torque_rel / force laws
  double noise = 0.0;         ///< measurement noise magnitude (0 = clean)
  InitSpec init;
  ScheduleSpec schedule;
  FormationSpec formation;
  std::vector<AgentPhys> phys;  ///< empty = defaults, one = shared, else per agent
  std::uint64_t seed = 1;
};

/// Throws ConfigInvalid on inconsistent settings (law/velocity-mode mismatch,
/// horizon not on the sample grid, sample interval not a multiple of the
/// substep, bad schedule shapes, non-positive-definite inertia, ...).
void validate_trial_config(const TrialConfig& cfg);

/// Realized piecewise-constant graph sequence of one trial.
struct GraphTimeline {
  std::vector<double> times;    ///< ascending change points, times[0] = 0
  std::vector<Digraph> graphs;  ///< graphs[k] active on [times[k], times[k+1])
  const Digraph& at(double t) const;        ///< right-continuous lookup
  Digraph union_over(double t1, double t2) const;  ///< union of graphs active on [t1, t2)
};

struct Trace {
  std::vector<double> times;                     ///< sample instants
  std::vector<std::vector<AgentState>> samples;  ///< [time index][agent]
  GraphTimeline schedule;                        ///< realized topology
  bool diverged = false;
  std::string failure;   ///< reason when diverged, empty otherwise
  double end_time = 0.0; ///< time of the last recorded sample
  const std::vector<AgentState>& last() const { return samples.back(); }
};

/// Runs one trial. A trial that leaves the valid state region (norms beyond
/// 1e9, non-finite values, or a law raising a domain error) is truncated and
/// flagged diverged rather than throwing.
Trace run_trial(const TrialConfig& cfg);

/// Per-trial verdict produced by a judge functor. Judges must be pure and
/// thread-safe; they see diverged traces too.
struct TrialVerdict {
  bool success = false;
  double rotation_error = 0.0;
  double translation_error = 0.0;
};
using TrialJudge = std::function<TrialVerdict(const Trace&)>;

struct McResult {
  int trials = 0;
  int successes = 0;
  int divergences = 0;
  std::vector<std::uint8_t> success;  ///< per-trial flags
  std::vector<double> rotation_errors;
  std::vector<double> translation_errors;
  double success_rate() const { return trials > 0 ? double(successes) / trials : 0.0; }
};

/// Runs `trials` independent trials; trial t uses seed child_seed(cfg.seed, t),
/// so results do not depend on scheduling.
McResult monte_carlo_serial(const TrialConfig& cfg, int trials, const TrialJudge& judge);

/// Same work partitioned across OpenMP threads (threads <= 0 picks the
/// runtime default); results are bit-identical to the serial runner.
McResult monte_carlo_parallel(const TrialConfig& cfg, int trials, const TrialJudge& judge,
                              int threads);

}  // namespace sesim
