// Command-line driver: run experiment configs, reproduce the built-in
// presets, and execute the property-check suites.
//
// Exit codes: 0 success (a diverged trial is still a completed run),
//             2 configuration error, 3 file IO error, 4 check-suite failure.
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sesim/analysis.hpp"
#include "sesim/checks.hpp"
#include "sesim/config.hpp"
#include "sesim/simulator.hpp"

namespace {

using namespace sesim;

std::string law_tag_list() {
  std::string out;
  for (LawTag t : all_law_tags()) {
    if (!out.empty()) out += ", ";
    out += law_tag_name(t);
  }
  // "free" is not a controller tag but configs accept it as the empty law
  // set (unforced rigid-body drift), so the enumeration must include it.
  out += ", free";
  return out;
}

std::string parameterization_list() {
  std::string out;
  for (ParamKind kind : Parameterization::all()) {
    if (!out.empty()) out += ", ";
    out += std::string(Parameterization(kind).name());
  }
  return out;
}

std::string preset_list() {
  std::string out;
  for (const std::string& name : preset_names()) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

std::string suite_list() {
  std::string out;
  for (const std::string& name : check_suite_names()) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

std::filesystem::path prepare_out_dir(const std::string& out) {
  std::filesystem::path dir(out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out + "': " + ec.message());
  return dir;
}

/// Runs one experiment and writes its files into dir. Always emits a trace,
/// an events sidecar, and a report; Monte-Carlo experiments (trials > 1) add
/// the per-trial CSV, and their trace comes from trial 0 as a representative
/// run. Returns the trace used for figure columns.
Trace run_experiment(const Experiment& ex, const std::filesystem::path& dir, int threads) {
  const std::string base = (dir / ex.name).string();
  Trace representative;
  if (ex.trials == 1) {
    representative = run_trial(ex.trial);
    write_text_file(base + "_report.json", report_to_json(ex, representative));
  } else {
    const McResult mc = monte_carlo_parallel(
        ex.trial, ex.trials, consensus_judge(ex.rotation_tol, ex.translation_tol), threads);
    write_text_file(base + "_report.json", report_to_json(ex, mc));
    write_text_file(base + "_trials.csv", mc_trials_to_csv(mc));
    TrialConfig rep = ex.trial;
    rep.seed = Rng::child_seed(ex.trial.seed, 0);
    representative = run_trial(rep);
  }
  write_text_file(base + "_trace.csv", trace_to_csv(representative));
  write_text_file(base + "_events.csv", events_to_csv(representative));
  std::printf("wrote %s_{trace,events,report}%s\n", base.c_str(),
              ex.trials > 1 ? " and per-trial results" : "");
  return representative;
}

void write_plot(const std::vector<std::pair<std::string, Trace>>& runs,
                const std::filesystem::path& dir, const std::string& stem) {
  std::vector<std::pair<std::string, const Trace*>> refs;
  refs.reserve(runs.size());
  for (const auto& [name, tr] : runs) refs.emplace_back(name, &tr);
  const std::string path = (dir / (stem + "_plot.csv")).string();
  write_text_file(path, plot_to_csv(refs));
  std::printf("wrote %s\n", path.c_str());
}

int cmd_run(const std::string& config_path, const std::string& out, std::int64_t seed,
            int trials, int threads) {
  Experiment ex = load_experiment(config_path);
  if (seed >= 0) ex.trial.seed = static_cast<std::uint64_t>(seed);
  if (trials > 0) ex.trials = trials;
  const std::filesystem::path dir = prepare_out_dir(out);
  const Trace tr = run_experiment(ex, dir, threads);
  write_plot({{ex.name, tr}}, dir, ex.name);
  return 0;
}

int cmd_preset(const std::string& name, const std::string& out, std::int64_t seed, int trials,
               int threads, double horizon) {
  std::vector<Experiment> experiments = preset_experiments(name);
  const std::filesystem::path dir = prepare_out_dir(out);
  std::vector<std::pair<std::string, Trace>> runs;
  for (Experiment& ex : experiments) {
    if (seed >= 0) ex.trial.seed = static_cast<std::uint64_t>(seed);
    if (trials > 0 && ex.trials > 1) ex.trials = trials;
    if (horizon > 0.0) ex.trial.horizon = horizon;
    runs.emplace_back(ex.name, run_experiment(ex, dir, threads));
  }
  write_plot(runs, dir, std::string(name));
  return 0;
}

int cmd_check(const std::string& suite, std::int64_t seed, int threads, const std::string& out) {
  const std::uint64_t s = seed >= 0 ? static_cast<std::uint64_t>(seed) : 1;
  const std::vector<CheckResult> results = run_check_suite(suite, s, threads);
  bool all_passed = true;
  std::string json = "[\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const CheckResult& r = results[i];
    all_passed = all_passed && r.passed;
    std::printf("%-34s %s  %s\n", r.name.c_str(), r.passed ? "pass" : "FAIL", r.detail.c_str());
    json += "  {\"name\": \"" + r.name + "\", \"passed\": " + (r.passed ? "true" : "false") +
            ", \"detail\": \"" + r.detail + "\"}";
    json += (i + 1 < results.size()) ? ",\n" : "\n";
  }
  json += "]\n";
  if (!out.empty()) {
    const std::filesystem::path dir = prepare_out_dir(out);
    const std::string path = (dir / (suite + "_checks.json")).string();
    write_text_file(path, json);
    std::printf("wrote %s\n", path.c_str());
  }
  std::printf("%-34s %s  (%zu checks)\n", "overall", all_passed ? "pass" : "FAIL", results.size());
  return all_passed ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("sesim: rigid-body consensus simulation and verification\n\n"
               "Law tags accepted in configs: " +
               law_tag_list() +
               "\nParameterizations: " + parameterization_list() +
               "\nPresets: " + preset_list() + "\nCheck suites: " + suite_list());
  app.require_subcommand(1);

  std::string config_path, preset_name, suite_name, out_dir = ".";
  std::int64_t seed = -1;
  int trials = 0, threads = 0;
  double horizon = 0.0;

  CLI::App* run = app.add_subcommand("run", "Run an experiment config (JSON)");
  run->add_option("--config", config_path, "Path to the experiment config")->required();
  run->add_option("--out", out_dir, "Output directory (created if missing)");
  run->add_option("--seed", seed, "Override the trial seed");
  run->add_option("--trials", trials, "Override the Monte-Carlo trial count");
  run->add_option("--threads", threads, "Worker threads (0 = runtime default)");

  CLI::App* preset = app.add_subcommand("preset", "Reproduce a built-in experiment preset");
  preset->add_option("--preset", preset_name, "Preset name (" + preset_list() + ")")->required();
  preset->add_option("--out", out_dir, "Output directory (created if missing)");
  preset->add_option("--seed", seed, "Override the trial seed");
  preset->add_option("--trials", trials, "Raise the Monte-Carlo trial count (e.g. 1000)");
  preset->add_option("--threads", threads, "Worker threads (0 = runtime default)");
  preset->add_option("--horizon", horizon, "Override the simulation horizon in seconds");

  CLI::App* check = app.add_subcommand("check", "Run a property-check suite");
  check->add_option("suite", suite_name, "Suite name (" + suite_list() + ")")->required();
  check->add_option("--seed", seed, "Master seed for the suite (default 1)");
  check->add_option("--threads", threads, "Worker threads (0 = runtime default)");
  check->add_option("--out", out_dir, "Also write a JSON summary into this directory");

  // `check` only writes when --out is passed explicitly.
  std::string check_out;
  check->callback([&] { check_out = check->count("--out") ? out_dir : ""; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, seed, trials, threads);
    if (preset->parsed()) return cmd_preset(preset_name, out_dir, seed, trials, threads, horizon);
    if (check->parsed()) return cmd_check(suite_name, seed, threads, check_out);
  } catch (const sesim::ConfigInvalid& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const sesim::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const sesim::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
