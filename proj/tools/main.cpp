#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "roughfilter/csv.hpp"
#include "roughfilter/experiment.hpp"
#include "roughfilter/verify.hpp"

// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 verification failure.

namespace {

namespace fs = std::filesystem;
using namespace roughfilter;

constexpr int kOk = 0, kConfigError = 2, kNumericalError = 3, kVerifyError = 4;

struct Overrides {
  std::string config_path;
  long long seed = -1;
  long replicates = -1;
  std::string mode, out_dir, in_dir;
};

ExperimentConfig load_config(const Overrides& ov) {
  ExperimentConfig c = parse_config_file(ov.config_path);
  if (ov.seed >= 0) c.seed = static_cast<unsigned long long>(ov.seed);
  if (ov.replicates >= 0) c.replicates = ov.replicates;
  if (!ov.mode.empty()) c.mode = ov.mode;
  if (!ov.out_dir.empty()) c.out_dir = ov.out_dir;
  c.validate();
  return c;
}

fs::path replicate_dir(const fs::path& root, long replicates, long k) {
  return replicates == 1 ? root : root / ("rep_" + std::to_string(k));
}

int cmd_simulate(const Overrides& ov) {
  const ExperimentConfig c = load_config(ov);
  for (long k = 0; k < c.replicates; ++k) {
    const fs::path dir = replicate_dir(c.out_dir, c.replicates, k);
    const SimData sim = simulate_paths(c, static_cast<unsigned long long>(k));
    write_simulation(dir, c, static_cast<unsigned long long>(k), sim);
    std::cout << "simulated " << c.experiment << " replicate " << k << " -> " << dir.string()
              << " (" << sim.chain.jump_times.size() << " jumps)\n";
  }
  return kOk;
}

int cmd_robust_filter(const Overrides& ov) {
  const ExperimentConfig c = load_config(ov);
  const fs::path in_root = ov.in_dir.empty() ? fs::path(c.out_dir) : fs::path(ov.in_dir);
  bool any_partial = false;
  for (long k = 0; k < c.replicates; ++k) {
    const fs::path dir = replicate_dir(in_root, c.replicates, k);
    const SampledRoughPath drive = load_drive(dir);
    const RunOutcome out = propagate_and_extract(c, drive);
    write_filter_outputs(dir, c, out);
    if (out.partial) {
      any_partial = true;
      std::cerr << "replicate " << k << ": propagation stopped at step " << out.fail_step
                << " (" << out.error << "); partial outputs written\n";
    } else {
      const RobustEstimate& last = out.estimates.back();
      std::cout << "replicate " << k << ": parameter estimate " << last.mapped_param
                << " at t = " << last.t << ", kappa_min = " << last.kappa_min << "\n";
    }
  }
  return any_partial ? kNumericalError : kOk;
}

int cmd_filter(const Overrides& ov) {
  const ExperimentConfig c = load_config(ov);
  const fs::path in_root = ov.in_dir.empty() ? fs::path(c.out_dir) : fs::path(ov.in_dir);
  for (long k = 0; k < c.replicates; ++k) {
    const fs::path dir = replicate_dir(in_root, c.replicates, k);
    const FilterResult res = run_plain_filter(c, load_drive(dir), dir);
    std::cout << "replicate " << k << ": posterior written, " << res.clamp_events
              << " clamp events, longest streak " << res.max_clamp_streak << "\n";
  }
  return kOk;
}

int cmd_verify(const std::string& suite, unsigned long long seed, const std::string& out_dir) {
  std::vector<CheckLine> lines;
  if (suite == "chen") lines = verify_chen(seed);
  else if (suite == "sharpness") lines = verify_sharpness();
  else if (suite == "dpp") lines = verify_dpp();
  else if (suite == "consistency") lines = verify_consistency(seed);
  else if (suite == "all") lines = verify_all(seed);
  else {
    std::cerr << "unknown suite '" << suite
              << "' (expected chen|sharpness|dpp|consistency|all)\n";
    return kConfigError;
  }

  for (const CheckLine& l : lines)
    std::cout << (l.pass ? "[PASS] " : "[FAIL] ") << l.name << ": " << l.detail << "\n";

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "verify_report.csv", std::ios::binary);
    out << "name,pass,detail\n";
    for (const CheckLine& l : lines)
      out << l.name << ',' << (l.pass ? 1 : 0) << ',' << l.detail << '\n';
  }
  return all_pass(lines) ? kOk : kVerifyError;
}

int cmd_fixture(long n, double p, double eps, const std::string& out_dir) {
  const SharpnessFixture fx = sharpness_fixture(n, p, eps);
  fs::create_directories(out_dir);

  const long np = fx.drive.size();
  Eigen::MatrixXd rows(np, 3);
  rows.col(0) = fx.drive.base.times;
  rows.col(1) = fx.drive.base.values.col(0);
  rows.col(2) = fx.companion.values.col(0);
  csv::write_table((fs::path(out_dir) / "fixture_path.csv").string(), {"t", "y", "gamma"},
                   rows);

  Eigen::MatrixXd meta(1, 4);
  meta << fx.expected_integral, fx.drive_pvar, fx.area_pvar, fx.companion_pvar;
  csv::write_table((fs::path(out_dir) / "fixture_meta.csv").string(),
                   {"integral", "drive_pvar", "area_pvar", "companion_pvar"}, meta);

  std::cout << "n = " << n << ", p = " << p << ", eps = " << eps
            << ": integral = " << csv::format_double(fx.expected_integral) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust two-state filtering under rate and observation uncertainty"};
  app.require_subcommand(1);

  Overrides ov;
  auto add_common = [&](CLI::App* cmd, bool needs_in) {
    cmd->add_option("--config", ov.config_path, "run configuration file")->required();
    cmd->add_option("--seed", ov.seed, "override the configured seed");
    cmd->add_option("--replicates", ov.replicates, "override the replicate count");
    cmd->add_option("--out", ov.out_dir, "override the output directory");
    cmd->add_option("--mode", ov.mode, "override the propagation mode (lq|grid)");
    if (needs_in)
      cmd->add_option("--in", ov.in_dir, "artifact directory (default: configured out_dir)");
  };

  CLI::App* sim = app.add_subcommand("simulate", "simulate chain and observation artifacts");
  add_common(sim, false);
  CLI::App* rob =
      app.add_subcommand("robust-filter", "propagate the uncertainty value function");
  add_common(rob, true);
  CLI::App* fil = app.add_subcommand("filter", "fixed-parameter posterior filter");
  add_common(fil, true);

  std::string suite = "all", verify_out;
  long long verify_seed = 2024;
  CLI::App* ver = app.add_subcommand("verify", "run an invariant suite");
  ver->add_option("suite", suite, "chen|sharpness|dpp|consistency|all");
  ver->add_option("--seed", verify_seed, "suite seed");
  ver->add_option("--out", verify_out, "also write verify_report.csv here");

  long fx_n = 64;
  double fx_p = 2.5, fx_eps = 0.1;
  std::string fx_out = "fixture_out";
  CLI::App* fx = app.add_subcommand("fixture", "emit the oscillating sharpness pair");
  fx->add_option("--n", fx_n, "oscillation count (power of two suggested)");
  fx->add_option("--p", fx_p, "variation exponent in [2, 3)");
  fx->add_option("--eps", fx_eps, "exponent margin in (0, 2/p)");
  fx->add_option("--out", fx_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (sim->parsed()) return cmd_simulate(ov);
    if (rob->parsed()) return cmd_robust_filter(ov);
    if (fil->parsed()) return cmd_filter(ov);
    if (ver->parsed())
      return cmd_verify(suite, static_cast<unsigned long long>(verify_seed), verify_out);
    if (fx->parsed()) return cmd_fixture(fx_n, fx_p, fx_eps, fx_out);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kNumericalError;
  }
  return kOk;
}
