#pragma once

#include <filesystem>

#include "roughfilter/config.hpp"
#include "roughfilter/robust.hpp"

// End-to-end experiment plumbing: simulate a chain and its observation under
// the configured truth schedule, lift, propagate the value function, extract
// estimate series, and read/write the CSV + manifest artifact layout.
//
// Artifact layout per run directory:
//   chain.csv        t, state                      (grid rows: T/dt + 1)
//   observation.csv  t, y                          (grid rows: T/dt + 1)
//   rough.csv        t0, t1, dy, area              (step rows: T/dt)
//   kappa_track.csv  t, kappa_min
//   estimates.csv    t, a_star, param, x1, x2, kappa_min
//   posterior.csv    t, p1, p2                     (plain filter only)
//   snapshot_<t>.csv q, gamma, value               (grid mode, optional)
//   manifest.json    config hash, seed, stream, files, timestamp

namespace roughfilter {

// Estimation chart of the configured experiment (the unknown coordinate).
ParamChart chart_for(const ExperimentConfig& c);

// Truth schedule in chart coordinates on an even n-point grid of spacing dt.
SampledPath truth_gamma_path(const ExperimentConfig& c, const ParamChart& chart,
                             double dt, long n);

struct SimData {
  ChainPath chain;
  SampledPath observation_fine;  // grid dt / lift_substeps
  SampledRoughPath drive;        // lift on the dt grid
};

SimData simulate_paths(const ExperimentConfig& c, unsigned long long stream);

struct RunOutcome {
  PropagateResult value;
  std::vector<RobustEstimate> estimates;  // one per grid time
  bool partial = false;                   // propagation aborted early
  long fail_step = -1;
  std::string error;
};

// Value propagation + estimate extraction; numerical failures are captured
// in the outcome (partial results up to the failing step), not rethrown.
RunOutcome propagate_and_extract(const ExperimentConfig& c, const SampledRoughPath& drive);

// simulate_paths + propagate_and_extract, all in memory.
RunOutcome run_experiment(const ExperimentConfig& c, unsigned long long stream);

void write_simulation(const std::filesystem::path& dir, const ExperimentConfig& c,
                      unsigned long long stream, const SimData& sim);
void write_filter_outputs(const std::filesystem::path& dir, const ExperimentConfig& c,
                          const RunOutcome& out);

// observation.csv plus rough.csv when present (canonical lift otherwise).
SampledRoughPath load_drive(const std::filesystem::path& dir);

// Fixed-parameter filter at config.filter_param (0 means the first scheduled
// truth value); writes posterior.csv.
FilterResult run_plain_filter(const ExperimentConfig& c, const SampledRoughPath& drive,
                              const std::filesystem::path& dir);

void emit_gnuplot_script(const std::filesystem::path& dir, const ExperimentConfig& c);

// One simulate + robust-filter pass per replicate, written under
// dir/rep_<k> (dir itself when replicates == 1); replicate k uses RNG stream
// k. Returns 0 on success, 3 if any replicate ended partial.
int run_replicates(const ExperimentConfig& c);

}  // namespace roughfilter
