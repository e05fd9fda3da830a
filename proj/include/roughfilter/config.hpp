#pragma once

#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "roughfilter/penalty.hpp"

// Flat key = value run configuration. '#' starts a comment, blank lines are
// skipped, unknown keys are hard errors, parse(serialize(c)) == c.

namespace roughfilter {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string experiment = "ex61";  // ex61 | ex62 | custom
  double T = 200.0;
  double dt = 2e-3;
  unsigned long long seed = 1;
  std::string mode = "lq";  // lq | grid
  std::string out_dir = "out";
  long replicates = 1;

  // chart constants; which ones matter depends on the experiment
  double nu = 1.0;      // ex61 total rate scale
  double alpha = 1.0;   // ex61 observation level
  double lambda = 5e-2, mu = 5e-2;  // ex62 fixed rates
  double nu1 = 0.2, nu2 = 1.8;      // ex62 level range

  PenaltySpec penalty;  // tau/delta/eps defaults overridden per experiment

  // Piecewise-constant truth for the natural parameter: (start time, value),
  // first start must be 0, starts strictly increasing; last value holds to T.
  std::vector<std::pair<double, double>> truth_schedule;

  // grid mode
  double q_lo = -8, q_hi = 8, g_lo = -8, g_hi = 8;
  long nq = 101, ng = 101;
  long n_controls = 21;
  double control_max = 50.0;
  double snapshot_interval = 0.0;  // 0 disables grid snapshots

  long lift_substeps = 10;    // simulation runs at dt / lift_substeps
  double filter_param = 0.0;  // natural parameter for the plain filter
  bool emit_gnuplot = false;

  double truth_at(double t) const;
  void validate() const;  // throws ConfigError
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);
std::string serialize_config(const ExperimentConfig& c);

// FNV-1a over the serialized form; stamped into run manifests.
std::string config_hash(const ExperimentConfig& c);

// Applies the experiment's published constants (chart values, tau/delta/eps,
// truth schedule) wherever the file did not override them.
void apply_experiment_defaults(ExperimentConfig& c, const std::vector<std::string>& seen_keys);

}  // namespace roughfilter
