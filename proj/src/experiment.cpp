#include "roughfilter/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "roughfilter/csv.hpp"

namespace roughfilter {

namespace fs = std::filesystem;
using nlohmann::json;

ParamChart chart_for(const ExperimentConfig& c) {
  if (c.experiment == "ex62")
    return ParamChart::observation_uncertain(c.lambda, c.mu, c.nu1, c.nu2);
  // ex61 and custom share the rate-uncertain family; custom differs only in
  // constants and schedule.
  return ParamChart::rate_uncertain(c.nu, c.alpha);
}

SampledPath truth_gamma_path(const ExperimentConfig& c, const ParamChart& chart,
                             double dt, long n) {
  Eigen::MatrixXd vals(n, 1);
  for (long i = 0; i < n; ++i) vals(i, 0) = chart.chart_point(c.truth_at(dt * double(i)));
  return SampledPath::uniform(0.0, dt, std::move(vals));
}

SimData simulate_paths(const ExperimentConfig& c, unsigned long long stream) {
  const ParamChart chart = chart_for(c);
  const long n_coarse = std::lround(c.T / c.dt);
  const long n_fine = n_coarse * c.lift_substeps;
  const double dt_f = c.dt / double(c.lift_substeps);

  CounterRng root(c.seed, stream);
  CounterRng chain_rng = root.split(1);
  CounterRng obs_rng = root.split(2);

  SimData sim;
  const SampledPath gamma = truth_gamma_path(c, chart, dt_f, n_fine + 1);
  SimplexState pi0;
  pi0.probs = Eigen::Vector2d(0.5, 0.5);
  sim.chain = simulate_chain(chart, gamma, pi0, chain_rng);
  sim.observation_fine = simulate_observation(sim.chain, chart, gamma, obs_rng);
  sim.drive = stratonovich_lift(sim.observation_fine, c.lift_substeps);
  return sim;
}

namespace {

std::vector<double> snapshot_times_for(const ExperimentConfig& c) {
  std::vector<double> ts;
  if (c.snapshot_interval <= 0) return ts;
  for (long k = 1; k * c.snapshot_interval <= c.T + 1e-9; ++k)
    ts.push_back(std::round(k * c.snapshot_interval / c.dt) * c.dt);
  return ts;
}

PropagateOptions options_for(const ExperimentConfig& c) {
  PropagateOptions o;
  o.mode = c.mode == "grid" ? PropagateMode::grid : PropagateMode::lq;
  o.q_lo = c.q_lo;
  o.q_hi = c.q_hi;
  o.g_lo = c.g_lo;
  o.g_hi = c.g_hi;
  o.nq = c.nq;
  o.ng = c.ng;
  o.n_controls = c.n_controls;
  o.control_max = c.control_max;
  o.snapshot_times = snapshot_times_for(c);
  return o;
}

SampledRoughPath truncate_drive(const SampledRoughPath& drive, long n_points) {
  SampledRoughPath out;
  out.base.times = drive.base.times.head(n_points);
  out.base.values = drive.base.values.topRows(n_points);
  out.step_areas = drive.step_areas.topRows(n_points - 1);
  return out;
}

void extract_estimates(const ExperimentConfig& c, const ParamChart& chart,
                       RunOutcome& out) {
  const PropagateResult& v = out.value;
  out.estimates.clear();
  out.estimates.reserve(v.times.size());
  if (c.mode == "grid") {
    for (size_t i = 0; i < v.times.size(); ++i) {
      RobustEstimate e;
      e.t = v.times[i];
      e.a_star = v.argmin_g[i];
      e.mapped_param = chart.natural_parameter(e.a_star);
      e.x_star = posterior_from_log_odds(v.argmin_q[i]);
      e.kappa_min = v.preshift_min[i];
      out.estimates.push_back(std::move(e));
    }
  } else {
    for (size_t i = 0; i < v.times.size(); ++i)
      out.estimates.push_back(most_reasonable(v.lq[i], v.preshift_min[i], chart, v.times[i]));
  }
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const fs::path& dir, const ExperimentConfig& c,
                    unsigned long long stream, const std::vector<std::string>& files,
                    bool partial, long fail_step, const std::string& note) {
  json m;
  m["config_hash"] = config_hash(c);
  m["experiment"] = c.experiment;
  m["mode"] = c.mode;
  m["seed"] = c.seed;
  m["stream"] = stream;
  m["files"] = files;
  m["partial"] = partial;
  if (partial) {
    m["fail_step"] = fail_step;
    m["error"] = note;
  }
  m["timestamp"] = iso_timestamp();
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
  out << m.dump(2) << "\n";
}

}  // namespace

RunOutcome propagate_and_extract(const ExperimentConfig& c, const SampledRoughPath& drive) {
  const ParamChart chart = chart_for(c);
  const TransformedDynamics dyn = transform_dynamics(chart, c.penalty);
  const PropagateOptions opts = options_for(c);

  RunOutcome out;
  try {
    out.value = propagate(drive, dyn, opts);
  } catch (const ConditioningError& e) {
    out.partial = true;
    out.fail_step = e.step;
    out.error = e.what();
  } catch (const SolveDiverged& e) {
    out.partial = true;
    out.fail_step = e.step;
    out.error = e.what();
  }
  if (out.partial) {
    // recover the prefix: the steps before fail_step are known good
    const long good_points = std::max<long>(out.fail_step, 0) + 1;
    if (good_points >= 2)
      out.value = propagate(truncate_drive(drive, good_points), dyn, opts);
    else
      out.value = PropagateResult{};
  }
  extract_estimates(c, chart, out);
  return out;
}

RunOutcome run_experiment(const ExperimentConfig& c, unsigned long long stream) {
  const SimData sim = simulate_paths(c, stream);
  return propagate_and_extract(c, sim.drive);
}

void write_simulation(const fs::path& dir, const ExperimentConfig& c,
                      unsigned long long stream, const SimData& sim) {
  fs::create_directories(dir);
  const SampledPath& coarse = sim.drive.base;
  const long n = coarse.size(), d = coarse.dim();

  {
    Eigen::MatrixXd rows(n, 2);
    for (long i = 0; i < n; ++i) {
      rows(i, 0) = coarse.times(i);
      rows(i, 1) = sim.chain.state_at(coarse.times(i));
    }
    csv::write_table((dir / "chain.csv").string(), {"t", "state"}, rows);
  }
  {
    Eigen::MatrixXd rows(n, 1 + d);
    rows.col(0) = coarse.times;
    rows.rightCols(d) = coarse.values;
    std::vector<std::string> head{"t"};
    for (long j = 0; j < d; ++j) head.push_back("y" + std::to_string(j + 1));
    csv::write_table((dir / "observation.csv").string(), head, rows);
  }
  {
    Eigen::MatrixXd rows(n - 1, 2 + d + d * d);
    std::vector<std::string> head{"t0", "t1"};
    for (long j = 0; j < d; ++j) head.push_back("dy" + std::to_string(j + 1));
    for (long a = 0; a < d; ++a)
      for (long b = 0; b < d; ++b)
        head.push_back("a" + std::to_string(a + 1) + std::to_string(b + 1));
    for (long i = 0; i + 1 < n; ++i) {
      rows(i, 0) = coarse.times(i);
      rows(i, 1) = coarse.times(i + 1);
      rows.block(i, 2, 1, d) = coarse.increment(i, i + 1);
      rows.block(i, 2 + d, 1, d * d) = sim.drive.step_areas.row(i);
    }
    csv::write_table((dir / "rough.csv").string(), head, rows);
  }
  write_manifest(dir, c, stream, {"chain.csv", "observation.csv", "rough.csv"}, false, -1, "");
}

void write_filter_outputs(const fs::path& dir, const ExperimentConfig& c,
                          const RunOutcome& out) {
  fs::create_directories(dir);
  const long n = static_cast<long>(out.estimates.size());
  std::vector<std::string> files;

  {
    Eigen::MatrixXd rows(n, 2);
    for (long i = 0; i < n; ++i) {
      rows(i, 0) = out.value.times[i];
      rows(i, 1) = out.value.preshift_min[i];
    }
    csv::write_table((dir / "kappa_track.csv").string(), {"t", "kappa_min"}, rows);
    files.push_back("kappa_track.csv");
  }
  {
    Eigen::MatrixXd rows(n, 6);
    for (long i = 0; i < n; ++i) {
      const RobustEstimate& e = out.estimates[static_cast<size_t>(i)];
      rows(i, 0) = e.t;
      rows(i, 1) = e.a_star;
      rows(i, 2) = e.mapped_param;
      rows(i, 3) = e.x_star.probs(0);
      rows(i, 4) = e.x_star.probs(1);
      rows(i, 5) = e.kappa_min;
    }
    csv::write_table((dir / "estimates.csv").string(),
                     {"t", "a_star", "param", "x1", "x2", "kappa_min"}, rows);
    files.push_back("estimates.csv");
  }
  for (size_t k = 0; k < out.value.snapshots.size(); ++k) {
    const auto& [t, gv] = out.value.snapshots[k];
    Eigen::MatrixXd rows(gv.q_axis.size() * gv.g_axis.size(), 3);
    long r = 0;
    for (long i = 0; i < gv.q_axis.size(); ++i)
      for (long j = 0; j < gv.g_axis.size(); ++j, ++r) {
        rows(r, 0) = gv.q_axis(i);
        rows(r, 1) = gv.g_axis(j);
        rows(r, 2) = gv.values(i, j);
      }
    const std::string name = "snapshot_" + std::to_string(k) + ".csv";
    csv::write_table((dir / name).string(), {"q", "gamma", "value"}, rows);
    files.push_back(name);
    (void)t;  // time recorded in the manifest via index order
  }
  if (c.emit_gnuplot) {
    emit_gnuplot_script(dir, c);
    files.push_back("plot.gp");
  }
  write_manifest(dir, c, 0, files, out.partial, out.fail_step, out.error);
}

SampledRoughPath load_drive(const fs::path& dir) {
  const Eigen::MatrixXd obs = csv::read_table((dir / "observation.csv").string());
  if (obs.cols() < 2) throw std::runtime_error("observation.csv needs t plus a value column");
  SampledPath base;
  base.times = obs.col(0);
  base.values = obs.rightCols(obs.cols() - 1);
  base.validate();
  const long d = base.dim();

  if (!fs::exists(dir / "rough.csv")) return canonical_lift(base);

  const Eigen::MatrixXd rough = csv::read_table((dir / "rough.csv").string());
  if (rough.rows() != base.size() - 1 || rough.cols() != 2 + d + d * d)
    throw std::runtime_error("rough.csv does not match observation.csv");
  SampledRoughPath rp;
  rp.base = std::move(base);
  rp.step_areas = rough.rightCols(d * d);
  rp.validate();
  return rp;
}

FilterResult run_plain_filter(const ExperimentConfig& c, const SampledRoughPath& drive,
                              const fs::path& dir) {
  const ParamChart chart = chart_for(c);
  const double natural = c.filter_param == 0.0 ? c.truth_at(0.0) : c.filter_param;
  Eigen::MatrixXd g(drive.size(), 1);
  g.setConstant(chart.chart_point(natural));
  SampledPath gamma;
  gamma.times = drive.base.times;
  gamma.values = std::move(g);
  SimplexState pi0;
  pi0.probs = Eigen::Vector2d(0.5, 0.5);

  FilterResult res = filter_rough(chart, gamma, pi0, drive);

  fs::create_directories(dir);
  const long n = res.sol.states.rows();
  Eigen::MatrixXd rows(n, 1 + res.sol.states.cols());
  rows.col(0) = res.sol.times;
  rows.rightCols(res.sol.states.cols()) = res.sol.states;
  std::vector<std::string> head{"t"};
  for (long j = 0; j < res.sol.states.cols(); ++j) head.push_back("p" + std::to_string(j + 1));
  csv::write_table((dir / "posterior.csv").string(), head, rows);
  return res;
}

void emit_gnuplot_script(const fs::path& dir, const ExperimentConfig& c) {
  std::ofstream out(dir / "plot.gp", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write plot.gp in " + dir.string());
  out << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set xlabel 't'\n"
      << "set terminal pngcairo size 1200,800\n"
      << "set output 'estimates.png'\n"
      << "truth(t) = ";
  // nested ternaries encode the piecewise-constant schedule
  const auto& sched = c.truth_schedule;
  for (size_t i = sched.size(); i-- > 1;)
    out << "(t >= " << csv::format_double(sched[i].first) << ") ? "
        << csv::format_double(sched[i].second) << " : ";
  out << csv::format_double(sched.front().second) << "\n"
      << "plot 'estimates.csv' using 1:3 with lines title 'estimate', \\\n"
      << "     truth(x) with lines dashtype 2 title 'truth'\n"
      << "set output 'posterior.png'\n"
      << "plot 'estimates.csv' using 1:5 with lines title 'x2 star'\n"
      << "set output 'kappa.png'\n"
      << "plot 'kappa_track.csv' using 1:2 with lines title 'kappa min'\n";
}

int run_replicates(const ExperimentConfig& c) {
  const fs::path root(c.out_dir);
  std::atomic<long> next{0};
  std::atomic<bool> any_partial{false};

  auto work = [&]() {
    for (long k = next.fetch_add(1); k < c.replicates; k = next.fetch_add(1)) {
      const fs::path dir = c.replicates == 1 ? root : root / ("rep_" + std::to_string(k));
      const SimData sim = simulate_paths(c, static_cast<unsigned long long>(k));
      write_simulation(dir, c, static_cast<unsigned long long>(k), sim);
      const RunOutcome out = propagate_and_extract(c, sim.drive);
      write_filter_outputs(dir, c, out);
      if (out.partial) any_partial = true;
    }
  };

  const long hw = static_cast<long>(std::thread::hardware_concurrency());
  const long workers = std::max(1L, std::min(c.replicates, hw > 0 ? hw : 1));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (long w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return any_partial ? 3 : 0;
}

}  // namespace roughfilter
