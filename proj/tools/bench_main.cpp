// Benchmark: the OpenMP Monte-Carlo runner against the serial reference.
// Verifies the two produce identical results, then reports wall times and
// the speedup. Options: --trials N, --threads N, --seed N.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <cstdlib>

#include "sesim/analysis.hpp"
#include "sesim/config.hpp"
#include "sesim/simulator.hpp"

using namespace sesim;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool same_results(const McResult& a, const McResult& b) {
  return a.trials == b.trials && a.successes == b.successes && a.divergences == b.divergences &&
         a.success == b.success && a.rotation_errors == b.rotation_errors &&
         a.translation_errors == b.translation_errors;
}

}  // namespace

int main(int argc, char** argv) {
  int trials = 200;
  int threads = 0;
  std::uint64_t seed = 1;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--trials") && i + 1 < argc) {
      trials = std::atoi(argv[++i]);
    } else if (!std::strcmp(argv[i], "--threads") && i + 1 < argc) {
      threads = std::atoi(argv[++i]);
    } else if (!std::strcmp(argv[i], "--seed") && i + 1 < argc) {
      seed = std::strtoull(argv[++i], nullptr, 10);
    } else {
      std::fprintf(stderr, "usage: %s [--trials N] [--threads N] [--seed N]\n", argv[0]);
      return 2;
    }
  }

  // The half-pi Monte-Carlo preset is the heaviest built-in workload, which
  // makes it a representative kernel for the comparison.
  Experiment ex = preset_experiments("mc-halfpi-ball").front();
  ex.trial.seed = seed;
  const TrialJudge judge = consensus_judge(ex.rotation_tol, ex.translation_tol);

  std::printf("workload: %s, %d trials, horizon %.0f s\n", ex.name.c_str(), trials,
              ex.trial.horizon);

  auto t0 = std::chrono::steady_clock::now();
  const McResult serial = monte_carlo_serial(ex.trial, trials, judge);
  const double serial_s = seconds_since(t0);
  std::printf("serial:   %8.3f s  (rate %.3f)\n", serial_s, serial.success_rate());

  t0 = std::chrono::steady_clock::now();
  const McResult parallel = monte_carlo_parallel(ex.trial, trials, judge, threads);
  const double parallel_s = seconds_since(t0);
  std::printf("parallel: %8.3f s  (rate %.3f, threads %s)\n", parallel_s, parallel.success_rate(),
              threads > 0 ? std::to_string(threads).c_str() : "auto");

  if (!same_results(serial, parallel)) {
    std::printf("MISMATCH: parallel results differ from the serial reference\n");
    return 1;
  }
  std::printf("results identical; speedup %.2fx\n", serial_s / parallel_s);
  return 0;
}
