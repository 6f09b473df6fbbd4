#include "vsg/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <ostream>
#include <sstream>

#include "vsg/errors.hpp"
#include "vsg/pi_controller.hpp"

namespace vsg {

namespace {

double parse_number(std::string_view text, std::string_view what) {
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw ConfigError("invalid number in " + std::string(what) + ": '" + s + "'");
  }
  return v;
}

std::string strip(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c != ' ' && c != '\t') out.push_back(c);
  }
  return out;
}

}  // namespace

std::vector<SchedulePoint> parse_schedule(std::string_view text) {
  std::vector<SchedulePoint> out;
  const std::string body = strip(text);
  std::size_t pos = 0;
  while (pos <= body.size()) {
    const std::size_t comma = std::min(body.find(',', pos), body.size());
    const std::string item = body.substr(pos, comma - pos);
    const std::size_t c1 = item.find(':');
    const std::size_t c2 = c1 == std::string::npos ? c1 : item.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw ConfigError("schedule entry must be t:p:q, got '" + item + "'");
    }
    SchedulePoint pt;
    pt.t_start = parse_number(item.substr(0, c1), "schedule");
    pt.p_set = parse_number(item.substr(c1 + 1, c2 - c1 - 1), "schedule");
    pt.q_set = parse_number(item.substr(c2 + 1), "schedule");
    out.push_back(pt);
    pos = comma + 1;
  }
  return out;
}

std::string format_schedule(const std::vector<SchedulePoint>& schedule) {
  std::string out;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_double(schedule[i].t_start) + ":" + format_double(schedule[i].p_set) + ":" +
           format_double(schedule[i].q_set);
  }
  return out;
}

void Scenario::validate() const {
  if (!(dt > 0.0)) throw InvalidParameter("scenario: dt must be > 0");
  if (!(duration >= 0.0)) throw InvalidParameter("scenario: duration must be >= 0");
  if (schedule.empty()) throw InvalidParameter("scenario: empty schedule");
  if (schedule.front().t_start != 0.0) {
    throw InvalidParameter("scenario: schedule must start at t = 0");
  }
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (!(schedule[i].t_start > schedule[i - 1].t_start)) {
      throw InvalidParameter("scenario: schedule times must be strictly increasing");
    }
  }
  if (duration > 0.0 && !(duration > schedule.back().t_start)) {
    throw InvalidParameter("scenario: duration must exceed the last schedule time");
  }
}

std::int64_t Scenario::num_steps() const { return std::llround(duration / dt); }

References Scenario::refs_at_step(std::int64_t k) const {
  References r;
  for (const auto& pt : schedule) {
    if (std::llround(pt.t_start / dt) > k) break;
    r.p_set = pt.p_set;
    r.q_set = pt.q_set;
  }
  return r;
}

std::vector<SchedulePoint> default_schedule() {
  return {{0.0, 2000.0, 0.0}, {5.0, 4000.0, 1000.0}, {10.0, 3000.0, -1000.0},
          {15.0, 4500.0, 500.0}};
}

std::string_view controller_name(ControllerKind c) {
  switch (c) {
    case ControllerKind::kPi: return "pi";
    case ControllerKind::kNnpc: return "nnpc";
    case ControllerKind::kDhp: return "dhp";
  }
  return "?";
}

ControllerKind parse_controller(std::string_view name) {
  if (name == "pi") return ControllerKind::kPi;
  if (name == "nnpc") return ControllerKind::kNnpc;
  if (name == "dhp") return ControllerKind::kDhp;
  throw InvalidParameter("unknown controller '" + std::string(name) + "'");
}

Trajectory run_scenario(ControllerKind controller, const Scenario& scenario,
                        const PlantSetup& setup, const ControllerAssets& assets) {
  scenario.validate();
  setup.grid.validate();
  setup.swing.validate();
  if (controller == ControllerKind::kNnpc && !assets.model) {
    throw InvalidParameter("nnpc needs an identified model");
  }
  if (controller == ControllerKind::kDhp && !assets.action) {
    throw InvalidParameter("dhp needs an action network");
  }
  const GridParams& grid = setup.grid;
  const double v = grid.v_grid_peak;

  Trajectory traj;
  traj.dt = scenario.dt;
  traj.f_nominal = grid.f_nominal;
  const std::int64_t n = scenario.num_steps();
  traj.rows.reserve(static_cast<std::size_t>(n));

  PlantState plant = initial_state(grid);
  PiState pi{plant.q_integrator};
  double e_prev = plant.e_peak;

  for (std::int64_t k = 0; k < n; ++k) {
    const References refs = scenario.refs_at_step(k);
    const AdpState x = make_adp_state(plant, refs, grid);
    double e_cmd = 0.0;
    switch (controller) {
      case ControllerKind::kPi: {
        const PiOutput out = pi_voltage_step(pi, refs.q_set, total_power(plant).q, v, e_prev,
                                             setup.swing.k_i, setup.swing.d_v, scenario.dt);
        pi = out.state;
        e_cmd = out.e_command;
        break;
      }
      case ControllerKind::kNnpc:
        e_cmd = nnpc_control(*assets.model, x, refs, plant.e_peak, setup.nnpc, setup.weights,
                             grid.command_limit());
        break;
      case ControllerKind::kDhp:
        e_cmd = dhp_control_step(*assets.action, x);
        break;
    }
    if (!std::isfinite(e_cmd)) {
      throw SimulationError("non-finite command at step " + std::to_string(k));
    }
    plant = plant_step(plant, e_cmd, refs.p_set, grid, setup.swing, scenario.dt);
    if (controller == ControllerKind::kPi) plant.q_integrator = pi.q_integral;
    e_prev = plant.e_peak;

    const AdpState xn = make_adp_state(plant, refs, grid);
    if (!xn.vector().allFinite() || !std::isfinite(plant.omega_i)) {
      throw SimulationError("non-finite state at step " + std::to_string(k));
    }
    TrajectoryRow row;
    row.t = static_cast<double>(k) * scenario.dt;
    row.p = xn.p;
    row.q = xn.q;
    row.f = plant.omega_i / (2.0 * std::numbers::pi);
    row.e = plant.e_peak;
    row.delta = plant.delta;
    row.p_set = refs.p_set;
    row.q_set = refs.q_set;
    row.u = utility(xn, setup.weights);
    traj.rows.push_back(row);
  }
  return traj;
}

Metrics compute_metrics(const Trajectory& traj) {
  if (traj.rows.empty()) throw InvalidParameter("compute_metrics: empty trajectory");
  Metrics m;
  const double dt = traj.dt;
  for (const auto& r : traj.rows) {
    const double ep = r.p_set - r.p;
    const double eq = r.q_set - r.q;
    m.ise_p += ep * ep * dt;
    m.ise_q += eq * eq * dt;
    m.iae_p += std::abs(ep) * dt;
    m.iae_q += std::abs(eq) * dt;
    m.max_freq_dev = std::max(m.max_freq_dev, std::abs(r.f - traj.f_nominal));
    m.mean_utility += r.u;
  }
  m.mean_utility /= static_cast<double>(traj.rows.size());
  return m;
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << "t,P,Q,f,E,delta,Pset,Qset,U\n";
  char buf[512];
  for (const auto& r : traj.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t,
                  r.p, r.q, r.f, r.e, r.delta, r.p_set, r.q_set, r.u);
    out << buf;
  }
}

}  // namespace vsg
