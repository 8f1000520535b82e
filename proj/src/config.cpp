#include "hifi/config.hpp"

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "hifi/errors.hpp"

namespace hifi {
namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_number(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError(where + ": empty numeric value");
  char* end = nullptr;
  const double value = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size())
    throw ConfigError(where + ": malformed number '" + t + "'");
  return value;
}

std::vector<double> parse_list(const std::string& text,
                               const std::string& where) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ','))
    values.push_back(parse_number(item, where));
  return values;
}

// section -> key -> raw value, with duplicate and unknown-key detection.
using RawConfig = std::map<std::string, std::map<std::string, std::string>>;

RawConfig parse_ini(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open config file: " + path);

  RawConfig raw;
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(file, line)) {
    ++lineno;
    const std::string where = path + ":" + std::to_string(lineno);
    std::string s = line;
    const size_t comment = s.find_first_of("#;");
    if (comment != std::string::npos) s = s.substr(0, comment);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError(where + ": unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      raw[section];
      continue;
    }
    const size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected 'key = value'");
    if (section.empty())
      throw ConfigError(where + ": key outside any section");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (!raw[section].emplace(key, value).second)
      throw ConfigError(where + ": duplicate key '" + key + "'");
  }
  return raw;
}

// Pulls one section's keys, enforcing that all of them are consumed.
class Section {
 public:
  Section(const RawConfig& raw, const std::string& name,
          const std::string& path)
      : name_(name), path_(path) {
    const auto it = raw.find(name);
    if (it != raw.end()) entries_ = it->second;
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return parse_number(take(key), context(key));
  }

  double required_number(const std::string& key) {
    if (!has(key))
      throw ConfigError(path_ + ": [" + name_ + "] is missing required key '" +
                        key + "'");
    return parse_number(take(key), context(key));
  }

  Vector3 triple(const std::string& key, const Vector3& fallback) {
    if (!has(key)) return fallback;
    const std::vector<double> values = parse_list(take(key), context(key));
    if (values.size() != 3)
      throw ConfigError(context(key) + ": expected exactly 3 values");
    return Vector3(values[0], values[1], values[2]);
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    return take(key);
  }

  void finish() const {
    for (const auto& [key, value] : entries_)
      if (!consumed_.count(key))
        throw ConfigError(path_ + ": unknown key '" + key + "' in section [" +
                          name_ + "]");
  }

 private:
  std::string context(const std::string& key) const {
    return path_ + ": [" + name_ + "] " + key;
  }
  std::string take(const std::string& key) {
    consumed_.insert(key);
    return entries_.at(key);
  }
  std::string name_;
  std::string path_;
  std::map<std::string, std::string> entries_;
  std::set<std::string> consumed_;
};

}  // namespace

Config load_config(const std::string& path) {
  const RawConfig raw = parse_ini(path);

  static const std::set<std::string> known_sections = {
      "suspension", "augment", "synthesis", "simulation", "kalman"};
  for (const auto& [section, keys] : raw)
    if (!known_sections.count(section))
      throw ConfigError(path + ": unknown section [" + section + "]");

  Config config;

  Section susp(raw, "suspension", path);
  config.suspension.m_s = susp.required_number("m_s");
  config.suspension.m_us = susp.required_number("m_us");
  config.suspension.k_s = susp.required_number("k_s");
  config.suspension.k_us = susp.required_number("k_us");
  config.suspension.c_s = susp.required_number("c_s");
  config.suspension.alpha = susp.required_number("alpha");
  susp.finish();

  Section aug(raw, "augment", path);
  config.d_r = aug.number("d_r", config.d_r);
  config.d_0 = aug.triple("d_0", config.d_0);
  config.d_1 = aug.number("d_1", config.d_1);
  config.tau_min = aug.number("tau_min", config.tau_min);
  config.tau_max = aug.number("tau_max", config.tau_max);
  config.road_decay = aug.number("road_decay", config.road_decay);
  aug.finish();

  Section syn(raw, "synthesis", path);
  config.gamma = syn.number("gamma", config.gamma);
  config.epsilon = syn.number("epsilon", config.epsilon);
  config.q1_min = syn.number("q1_min", config.q1_min);
  config.q1_max = syn.number("q1_max", config.q1_max);
  syn.finish();

  Section sim(raw, "simulation", path);
  config.sim.dt = sim.number("dt", config.sim.dt);
  config.sim.horizon = sim.number("horizon", config.sim.horizon);
  config.sim.seed = static_cast<unsigned long long>(
      sim.number("seed", static_cast<double>(config.sim.seed)));
  config.sim.sigma_w = sim.number("sigma_w", config.sim.sigma_w);
  const std::string mode = sim.text("mode", "scenario");
  if (mode == "scenario")
    config.sim.mode = SimConfig::Mode::kScenario;
  else if (mode == "model-consistent")
    config.sim.mode = SimConfig::Mode::kModelConsistent;
  else
    throw ConfigError(path + ": [simulation] mode must be 'scenario' or "
                      "'model-consistent'");
  const std::string kind = sim.text("delay_kind", "constant");
  if (kind == "constant") {
    config.delay = DelayProfile::constant(sim.number("delay_tau", 0.2));
  } else if (kind == "sinusoid") {
    config.delay = DelayProfile::sinusoid(sim.number("delay_mean", 0.25),
                                          sim.number("delay_amplitude", 0.25),
                                          sim.number("delay_period", 2.0));
  } else if (kind == "random-walk") {
    config.delay.kind = DelayProfile::Kind::kRandomWalk;
    config.delay.seed = static_cast<unsigned long long>(
        sim.number("delay_seed", 1.0));
    config.delay.step_std = sim.number("delay_step_std", 0.01);
  } else {
    throw ConfigError(path + ": [simulation] delay_kind must be 'constant', "
                      "'sinusoid', or 'random-walk'");
  }
  sim.finish();

  Section kal(raw, "kalman", path);
  config.q_w = kal.number("q_w", config.q_w);
  config.r_diag = kal.triple("r_diag", config.r_diag);
  kal.finish();

  // Re-validate the model-level invariants eagerly so a bad file fails
  // here, with file context, rather than deep inside a workflow.
  try {
    (void)make_system(config);
  } catch (const std::domain_error& err) {
    throw ConfigError(path + ": " + err.what());
  }
  if (!(config.gamma > 0.0))
    throw ConfigError(path + ": [synthesis] gamma must be positive");
  if (!(config.epsilon >= 0.0))
    throw ConfigError(path + ": [synthesis] epsilon must be non-negative");
  if (!(config.q1_min > 0.0) || !(config.q1_max >= config.q1_min))
    throw ConfigError(path + ": [synthesis] requires 0 < q1_min <= q1_max");
  if (!(config.sim.dt > 0.0) || !(config.sim.horizon >= config.sim.dt))
    throw ConfigError(path +
                      ": [simulation] requires dt > 0 and horizon >= dt");
  if (!(config.sim.sigma_w >= 0.0))
    throw ConfigError(path + ": [simulation] sigma_w must be non-negative");
  if (!(config.q_w >= 0.0))
    throw ConfigError(path + ": [kalman] q_w must be non-negative");
  if (!(config.r_diag.minCoeff() > 0.0))
    throw ConfigError(path + ": [kalman] r_diag entries must be positive");
  return config;
}

Plant make_plant(const Config& config) {
  Plant plant = build_plant(config.suspension);
  plant.D0 = config.d_0;
  return plant;
}

AugmentedDelaySystem make_system(const Config& config) {
  return augment(make_plant(config), config.d_r, config.d_1, config.tau_min,
                 config.tau_max, config.road_decay);
}

std::string hash_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot open file for hashing: " + path);
  std::uint64_t hash = 1469598103934665603ull;  // FNV-1a offset basis
  char byte = 0;
  while (file.get(byte)) {
    hash ^= static_cast<unsigned char>(byte);
    hash *= 1099511628211ull;  // FNV-1a prime
  }
  std::ostringstream out;
  out << "fnv1a64:" << std::hex << hash;
  return out.str();
}

}  // namespace hifi
