#include "vsg/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <numbers>
#include <set>
#include <string_view>

#include "vsg/errors.hpp"

namespace vsg {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size() || !std::isfinite(v)) {
    throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
  }
  return v;
}

std::int64_t to_int(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (value.empty() || end != value.c_str() + value.size()) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
  }
  return v;
}

ExcitationLoop to_loop(const std::string& key, const std::string& value) {
  if (value == "reactive") return ExcitationLoop::kReactive;
  if (value == "active") return ExcitationLoop::kActive;
  throw ConfigError("key '" + key + "': expected reactive|active, got '" + value + "'");
}

using Setter = std::function<void(Config&, const std::string&, const std::string&)>;

Setter real(double Config::*field) {
  return [field](Config& c, const std::string& k, const std::string& v) {
    c.*field = to_double(k, v);
  };
}

template <class F>
Setter with(F f) {
  return [f](Config& c, const std::string& k, const std::string& v) { f(c, k, v); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"grid.dc_voltage", real(&Config::dc_voltage)},
      {"grid.ac_line_voltage", real(&Config::ac_line_voltage)},
      {"grid.frequency", real(&Config::frequency)},
      {"grid.p_rated", real(&Config::p_rated)},
      {"grid.inductive.l_filter", with([](Config& c, auto& k, auto& v) { c.inductive.l_filter = to_double(k, v); })},
      {"grid.inductive.l_line", with([](Config& c, auto& k, auto& v) { c.inductive.l_line = to_double(k, v); })},
      {"grid.inductive.r_line", with([](Config& c, auto& k, auto& v) { c.inductive.r_line = to_double(k, v); })},
      {"grid.resistive.l_filter", with([](Config& c, auto& k, auto& v) { c.resistive.l_filter = to_double(k, v); })},
      {"grid.resistive.l_line", with([](Config& c, auto& k, auto& v) { c.resistive.l_line = to_double(k, v); })},
      {"grid.resistive.r_line", with([](Config& c, auto& k, auto& v) { c.resistive.r_line = to_double(k, v); })},
      {"swing.inertia", real(&Config::inertia)},
      {"swing.droop_fraction", real(&Config::droop_fraction)},
      {"swing.k_i", real(&Config::k_i)},
      {"swing.d_v", real(&Config::d_v)},
      {"dhp.gamma", with([](Config& c, auto& k, auto& v) { c.dhp.gamma = to_double(k, v); })},
      {"dhp.lr_critic", with([](Config& c, auto& k, auto& v) { c.dhp.lr_critic = to_double(k, v); })},
      {"dhp.lr_action", with([](Config& c, auto& k, auto& v) { c.dhp.lr_action = to_double(k, v); })},
      {"dhp.episodes", with([](Config& c, auto& k, auto& v) { c.dhp.episodes = static_cast<int>(to_int(k, v)); })},
      {"dhp.steps_per_episode", with([](Config& c, auto& k, auto& v) { c.dhp.steps_per_episode = static_cast<int>(to_int(k, v)); })},
      {"dhp.epsilon_u", with([](Config& c, auto& k, auto& v) { c.dhp.epsilon_u = to_double(k, v); })},
      {"dhp.exploration", with([](Config& c, auto& k, auto& v) { c.dhp.exploration = to_double(k, v); })},
      {"dhp.action_band", with([](Config& c, auto& k, auto& v) { c.action_band = to_double(k, v); })},
      {"dhp.lr_final_fraction", with([](Config& c, auto& k, auto& v) { c.dhp.lr_final_fraction = to_double(k, v); })},
      {"dhp.k_p", with([](Config& c, auto& k, auto& v) { c.weights.k_p = to_double(k, v); })},
      {"dhp.k_q", with([](Config& c, auto& k, auto& v) { c.weights.k_q = to_double(k, v); })},
      {"dhp.k_f", with([](Config& c, auto& k, auto& v) { c.weights.k_f = to_double(k, v); })},
      {"nnpc.n_candidates", with([](Config& c, auto& k, auto& v) { c.nnpc.n_candidates = static_cast<int>(to_int(k, v)); })},
      {"nnpc.delta_e_max", with([](Config& c, auto& k, auto& v) { c.nnpc.delta_e_max = to_double(k, v); })},
      {"nnpc.horizon", with([](Config& c, auto& k, auto& v) { c.nnpc.horizon = static_cast<int>(to_int(k, v)); })},
      {"scenario.duration", with([](Config& c, auto& k, auto& v) { c.scenario.duration = to_double(k, v); })},
      {"scenario.dt", with([](Config& c, auto& k, auto& v) { c.scenario.dt = to_double(k, v); })},
      {"scenario.seed", with([](Config& c, auto& k, auto& v) { c.scenario.seed = static_cast<std::uint64_t>(to_int(k, v)); })},
      {"scenario.grid", with([](Config& c, auto&, auto& v) { c.scenario.grid_tag = parse_grid_tag(v); })},
      {"scenario.schedule", with([](Config& c, auto&, auto& v) { c.scenario.schedule = parse_schedule(v); })},
      {"sysid.n_samples", with([](Config& c, auto& k, auto& v) { c.sysid.n_samples = static_cast<int>(to_int(k, v)); })},
      {"sysid.epochs", with([](Config& c, auto& k, auto& v) { c.sysid.train.epochs = static_cast<int>(to_int(k, v)); })},
      {"sysid.lr", with([](Config& c, auto& k, auto& v) { c.sysid.train.learning_rate = to_double(k, v); })},
      {"sysid.lr_final", with([](Config& c, auto& k, auto& v) { c.sysid.train.learning_rate_final = to_double(k, v); })},
      {"sysid.holdout", with([](Config& c, auto& k, auto& v) { c.sysid.train.holdout_fraction = to_double(k, v); })},
      {"sysid.freq_span", with([](Config& c, auto& k, auto& v) { c.sysid.freq_span = to_double(k, v); })},
      {"sysid.inductive.excitation", with([](Config& c, auto& k, auto& v) { c.sysid.inductive.loop = to_loop(k, v); })},
      {"sysid.inductive.dither", with([](Config& c, auto& k, auto& v) { c.sysid.inductive.dither = to_double(k, v); })},
      {"sysid.inductive.active_gain", with([](Config& c, auto& k, auto& v) { c.sysid.inductive.active_gain = to_double(k, v); })},
      {"sysid.resistive.excitation", with([](Config& c, auto& k, auto& v) { c.sysid.resistive.loop = to_loop(k, v); })},
      {"sysid.resistive.dither", with([](Config& c, auto& k, auto& v) { c.sysid.resistive.dither = to_double(k, v); })},
      {"sysid.resistive.active_gain", with([](Config& c, auto& k, auto& v) { c.sysid.resistive.active_gain = to_double(k, v); })},
  };
  return table;
}

void validate(const Config& c) {
  if (!(c.ac_line_voltage > 0.0)) throw ConfigError("grid.ac_line_voltage must be > 0");
  if (!(c.frequency > 0.0)) throw ConfigError("grid.frequency must be > 0");
  if (!(c.p_rated > 0.0)) throw ConfigError("grid.p_rated must be > 0");
  for (GridTag tag : {GridTag::kInductive, GridTag::kResistive}) {
    const LineSpec& l = tag == GridTag::kInductive ? c.inductive : c.resistive;
    const std::string name(grid_tag_name(tag));
    if (l.l_filter < 0.0 || l.l_line < 0.0 || l.r_line < 0.0) {
      throw ConfigError("grid." + name + ": line data must be >= 0");
    }
    if (l.l_filter + l.l_line == 0.0 && l.r_line == 0.0) {
      throw ConfigError("grid." + name + ": degenerate impedance (Z_eq = 0)");
    }
  }
  try {
    c.swing().validate();
    c.dhp.validate();
    c.weights.validate();
    c.nnpc.validate();
    c.scenario.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(c.action_band > 0.0)) throw ConfigError("dhp.action_band must be > 0");
  if (c.sysid.n_samples < 1) throw ConfigError("sysid.n_samples must be >= 1");
  if (c.sysid.train.epochs < 0) throw ConfigError("sysid.epochs must be >= 0");
  if (!(c.sysid.train.learning_rate > 0.0)) throw ConfigError("sysid.lr must be > 0");
  if (!(c.sysid.train.holdout_fraction > 0.0 && c.sysid.train.holdout_fraction < 1.0)) {
    throw ConfigError("sysid.holdout must be in (0, 1)");
  }
  if (!(c.sysid.freq_span > 0.0)) throw ConfigError("sysid.freq_span must be > 0");
}

}  // namespace

GridParams Config::grid(GridTag tag) const {
  const LineSpec& l = tag == GridTag::kInductive ? inductive : resistive;
  return make_grid(ac_line_voltage, frequency, l.l_filter, l.l_line, l.r_line, p_rated);
}

SwingParams Config::swing() const {
  SwingParams s;
  s.inertia_j = inertia;
  s.droop_d = derive_droop_coefficient(p_rated, droop_fraction, 2.0 * std::numbers::pi * frequency);
  s.k_i = k_i;
  s.d_v = d_v;
  return s;
}

AdpScaling Config::scaling(GridTag tag) const { return make_adp_scaling(grid(tag), sysid.freq_span); }

PlantSetup Config::plant_setup(GridTag tag) const {
  return PlantSetup{grid(tag), swing(), weights, nnpc};
}

Scenario Config::scenario_for(GridTag tag) const {
  Scenario s = scenario;
  s.grid_tag = tag;
  return s;
}

Config default_config() {
  Config c;
  c.dhp.gamma = 1.0;
  c.nnpc.delta_e_max = kDefaultNnpcDeltaFraction * peak_phase_voltage(c.ac_line_voltage);
  c.scenario.schedule = default_schedule();
  c.sysid.resistive.loop = ExcitationLoop::kActive;
  c.sysid.inductive.dither = kDefaultInductiveDither;
  c.sysid.resistive.dither = kDefaultResistiveDither;
  return c;
}

Config parse_config(std::istream& in, const std::string& source) {
  Config c = default_config();
  bool delta_e_given = false;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");
    try {
      it->second(c, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + ": key '" + key + "': " + e.what());
    }
    if (key == "nnpc.delta_e_max") delta_e_given = true;
  }
  if (!delta_e_given) {
    c.nnpc.delta_e_max = kDefaultNnpcDeltaFraction * peak_phase_voltage(c.ac_line_voltage);
  }
  validate(c);
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

}  // namespace vsg
