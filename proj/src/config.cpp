#include "roughfilter/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>

#include "roughfilter/csv.hpp"

namespace roughfilter {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  size_t pos = 0;
  double x;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for " + key + ": '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError("config: trailing junk for " + key + ": '" + v + "'");
  return x;
}

long to_long(const std::string& key, const std::string& v) {
  size_t pos = 0;
  long x;
  try {
    x = std::stol(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for " + key + ": '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError("config: trailing junk for " + key + ": '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("config: expected true/false for " + key + ": '" + v + "'");
}

std::vector<std::pair<double, double>> parse_schedule(const std::string& v) {
  std::vector<std::pair<double, double>> out;
  std::stringstream ss(v);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    piece = trim(piece);
    size_t colon = piece.find(':');
    if (colon == std::string::npos)
      throw ConfigError("config: truth_schedule entries are start:value, got '" + piece + "'");
    out.emplace_back(to_double("truth_schedule", trim(piece.substr(0, colon))),
                     to_double("truth_schedule", trim(piece.substr(colon + 1))));
  }
  if (out.empty()) throw ConfigError("config: empty truth_schedule");
  return out;
}

std::string serialize_schedule(const std::vector<std::pair<double, double>>& s) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += csv::format_double(s[i].first) + ":" + csv::format_double(s[i].second);
  }
  return out;
}

}  // namespace

double ExperimentConfig::truth_at(double t) const {
  double v = truth_schedule.front().second;
  for (const auto& [start, val] : truth_schedule) {
    if (t >= start) v = val;
    else break;
  }
  return v;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  if (experiment != "ex61" && experiment != "ex62" && experiment != "custom")
    fail("experiment must be ex61, ex62, or custom");
  if (!(T > 0)) fail("T must be positive");
  if (!(dt > 0) || dt >= T) fail("dt must lie in (0, T)");
  if (mode != "lq" && mode != "grid") fail("mode must be lq or grid");
  if (replicates < 1) fail("replicates must be at least 1");
  if (lift_substeps < 1) fail("lift_substeps must be at least 1");
  if (!(nu > 0)) fail("nu must be positive");
  if (!(alpha > 0)) fail("alpha must be positive");
  if (!(lambda > 0) || !(mu > 0)) fail("lambda and mu must be positive");
  if (!(nu1 >= 0) || !(nu2 > nu1)) fail("need 0 <= nu1 < nu2");
  try {
    penalty.validate();
  } catch (const std::exception& e) {
    fail(e.what());
  }
  if (truth_schedule.empty()) fail("truth_schedule required");
  if (truth_schedule.front().first != 0) fail("truth_schedule must start at 0");
  for (size_t i = 1; i < truth_schedule.size(); ++i)
    if (!(truth_schedule[i].first > truth_schedule[i - 1].first))
      fail("truth_schedule starts must increase");
  for (const auto& [start, val] : truth_schedule) {
    (void)start;
    if (experiment == "ex61" && !(val > 0 && val < nu))
      fail("ex61 truth rates must lie in (0, nu)");
    if (experiment == "ex62" && !(val > nu1 && val < nu2))
      fail("ex62 truth levels must lie in (nu1, nu2)");
    if (!std::isfinite(val)) fail("truth values must be finite");
  }
  if (!(q_lo < q_hi) || !(g_lo < g_hi)) fail("grid bounds must be ordered");
  if (nq < 2 || ng < 2) fail("grid needs at least 2 nodes per axis");
  if (n_controls < 2) fail("need at least 2 controls");
  if (!(control_max > 0)) fail("control_max must be positive");
  if (snapshot_interval < 0) fail("snapshot_interval must be nonnegative");
  if (experiment == "ex62" && !(filter_param == 0.0 || (filter_param > nu1 && filter_param < nu2)))
    fail("ex62 filter_param must lie in (nu1, nu2)");
  if (experiment == "ex61" && !(filter_param == 0.0 || (filter_param > 0 && filter_param < nu)))
    fail("ex61 filter_param must lie in (0, nu)");
}

void apply_experiment_defaults(ExperimentConfig& c, const std::vector<std::string>& seen) {
  auto unseen = [&](const char* key) {
    return std::find(seen.begin(), seen.end(), key) == seen.end();
  };
  if (c.experiment == "ex61") {
    if (unseen("tau")) c.penalty.tau = 5e-2;
    if (unseen("delta")) c.penalty.delta = 5e-2;
    if (unseen("eps")) c.penalty.eps = 1e-3;
    if (unseen("truth_schedule"))
      c.truth_schedule = {{0, 0.1}, {500, 0.7}, {1000, 0.3}, {1500, 0.9}};
  } else if (c.experiment == "ex62") {
    if (unseen("tau")) c.penalty.tau = 1e-2;
    if (unseen("delta")) c.penalty.delta = 1e-2;
    if (unseen("eps")) c.penalty.eps = 1e-3;
    if (unseen("truth_schedule"))
      c.truth_schedule = {{0, 0.4}, {500, 1.3}, {1000, 0.7}, {1500, 1.6}};
  } else if (c.truth_schedule.empty()) {
    throw ConfigError("config: custom experiment requires truth_schedule");
  }
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::vector<std::string> seen;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key = value at line " + std::to_string(line_no));
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      throw ConfigError("config: duplicate key " + key);
    seen.push_back(key);

    if (key == "experiment") c.experiment = val;
    else if (key == "T") c.T = to_double(key, val);
    else if (key == "dt") c.dt = to_double(key, val);
    else if (key == "seed") c.seed = static_cast<unsigned long long>(to_long(key, val));
    else if (key == "mode") c.mode = val;
    else if (key == "out_dir") c.out_dir = val;
    else if (key == "replicates") c.replicates = to_long(key, val);
    else if (key == "nu") c.nu = to_double(key, val);
    else if (key == "alpha") c.alpha = to_double(key, val);
    else if (key == "lambda") c.lambda = to_double(key, val);
    else if (key == "mu") c.mu = to_double(key, val);
    else if (key == "nu1") c.nu1 = to_double(key, val);
    else if (key == "nu2") c.nu2 = to_double(key, val);
    else if (key == "tau") c.penalty.tau = to_double(key, val);
    else if (key == "delta") c.penalty.delta = to_double(key, val);
    else if (key == "eps") c.penalty.eps = to_double(key, val);
    else if (key == "q_anchor") c.penalty.q_anchor = to_double(key, val);
    else if (key == "gamma_anchor") c.penalty.gamma_anchor = to_double(key, val);
    else if (key == "init_weight_q") c.penalty.init_weight_q = to_double(key, val);
    else if (key == "init_weight_gamma") c.penalty.init_weight_gamma = to_double(key, val);
    else if (key == "clamp_streak_limit") c.penalty.clamp_streak_limit = to_long(key, val);
    else if (key == "truth_schedule") c.truth_schedule = parse_schedule(val);
    else if (key == "q_lo") c.q_lo = to_double(key, val);
    else if (key == "q_hi") c.q_hi = to_double(key, val);
    else if (key == "g_lo") c.g_lo = to_double(key, val);
    else if (key == "g_hi") c.g_hi = to_double(key, val);
    else if (key == "nq") c.nq = to_long(key, val);
    else if (key == "ng") c.ng = to_long(key, val);
    else if (key == "n_controls") c.n_controls = to_long(key, val);
    else if (key == "control_max") c.control_max = to_double(key, val);
    else if (key == "snapshot_interval") c.snapshot_interval = to_double(key, val);
    else if (key == "lift_substeps") c.lift_substeps = to_long(key, val);
    else if (key == "filter_param") c.filter_param = to_double(key, val);
    else if (key == "emit_gnuplot") c.emit_gnuplot = to_bool(key, val);
    else throw ConfigError("config: unknown key '" + key + "' at line " + std::to_string(line_no));
  }
  apply_experiment_defaults(c, seen);
  c.validate();
  return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  return parse_config(in);
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  auto kv = [&](const char* k, const std::string& v) { out << k << " = " << v << "\n"; };
  auto kd = [&](const char* k, double v) { kv(k, csv::format_double(v)); };
  auto kl = [&](const char* k, long v) { kv(k, std::to_string(v)); };
  kv("experiment", c.experiment);
  kd("T", c.T);
  kd("dt", c.dt);
  kv("seed", std::to_string(c.seed));
  kv("mode", c.mode);
  kv("out_dir", c.out_dir);
  kl("replicates", c.replicates);
  kd("nu", c.nu);
  kd("alpha", c.alpha);
  kd("lambda", c.lambda);
  kd("mu", c.mu);
  kd("nu1", c.nu1);
  kd("nu2", c.nu2);
  kd("tau", c.penalty.tau);
  kd("delta", c.penalty.delta);
  kd("eps", c.penalty.eps);
  kd("q_anchor", c.penalty.q_anchor);
  kd("gamma_anchor", c.penalty.gamma_anchor);
  kd("init_weight_q", c.penalty.init_weight_q);
  kd("init_weight_gamma", c.penalty.init_weight_gamma);
  kl("clamp_streak_limit", c.penalty.clamp_streak_limit);
  kv("truth_schedule", serialize_schedule(c.truth_schedule));
  kd("q_lo", c.q_lo);
  kd("q_hi", c.q_hi);
  kd("g_lo", c.g_lo);
  kd("g_hi", c.g_hi);
  kl("nq", c.nq);
  kl("ng", c.ng);
  kl("n_controls", c.n_controls);
  kd("control_max", c.control_max);
  kd("snapshot_interval", c.snapshot_interval);
  kl("lift_substeps", c.lift_substeps);
  kd("filter_param", c.filter_param);
  kv("emit_gnuplot", c.emit_gnuplot ? "true" : "false");
  return out.str();
}

std::string config_hash(const ExperimentConfig& c) {
  std::string s = serialize_config(c);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace roughfilter
