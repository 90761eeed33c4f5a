#pragma once

/// \file config.hpp
/// JSON experiment configs, the built-in presets, and the text formats the
/// command-line tools emit (trace/event/plot/trial CSV and verdict JSON).
/// Every floating-point field is rendered with 17 significant digits, so a
/// rerun under the same seed reproduces each file byte for byte.

#include "sesim/simulator.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sesim {

/// One named experiment: a trial template, the Monte-Carlo scale, and the
/// success tolerances the judge applies.
struct Experiment {
  std::string name = "experiment";
  TrialConfig trial;
  int trials = 1;
  double rotation_tol = 1e-3;
  double translation_tol = 1e-3;
};

/// Parse an experiment from JSON text. Unknown or ill-typed keys raise
/// ConfigInvalid naming the offending key by path (e.g. "/trial/schedule");
/// the parsed trial is validated before it is returned.
Experiment parse_experiment(const std::string& json_text);

/// Read and parse a config file; IoError on filesystem failure.
Experiment load_experiment(const std::string& path);

/// Emit an experiment as JSON. parse_experiment inverts it exactly, and
/// emitting the parsed copy reproduces the same bytes.
std::string experiment_to_json(const Experiment& ex);

/// Names of the built-in presets, in display order.
const std::vector<std::string>& preset_names();

/// The experiments a preset bundles (several when one figure overlays
/// multiple laws). Throws ConfigInvalid for unknown names.
std::vector<Experiment> preset_experiments(std::string_view name);

/// Trace CSV with the pinned header
/// t,agent,R00,...,R22,Tx,Ty,Tz,wx,wy,wz,vx,vy,vz (rotation row-major).
std::string trace_to_csv(const Trace& tr);

/// Topology sidecar CSV (t,agent,neighbors): one row per agent per switch,
/// neighbors semicolon-joined in ascending order, self included.
std::string events_to_csv(const Trace& tr);

/// Figure columns for one or more runs sharing a time grid: per run, the
/// Frobenius distance and translation distance of every agent to agent one,
/// then each agent's upper-left rotation entry. Columns are prefixed with
/// the run name; rows cover the shortest run. Throws ConfigInvalid when
/// empty or when the grids disagree.
std::string plot_to_csv(const std::vector<std::pair<std::string, const Trace*>>& runs);

/// Verdict record for one trial, judged with the experiment's tolerances.
std::string report_to_json(const Experiment& ex, const Trace& tr);

/// Aggregate Monte-Carlo record with one embedded result per trial.
std::string report_to_json(const Experiment& ex, const McResult& mc);

/// Per-trial rows of a Monte-Carlo sweep
/// (trial,success,rotation_error,translation_error).
std::string mc_trials_to_csv(const McResult& mc);

/// Whole-file text IO; both throw IoError on filesystem failure.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace sesim
