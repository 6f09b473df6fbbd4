#include "vsg/plant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vsg/errors.hpp"

namespace vsg {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidParameter(what);
}

}  // namespace

double GridParams::z_eq() const { return std::hypot(r_eq(), x_eq()); }

void GridParams::validate() const {
  require(std::isfinite(v_grid_peak) && v_grid_peak > 0.0, "grid: v_grid_peak must be > 0");
  require(std::isfinite(f_nominal) && f_nominal > 0.0, "grid: f_nominal must be > 0");
  require(omega_nominal == 2.0 * std::numbers::pi * f_nominal,
          "grid: omega_nominal must equal 2*pi*f_nominal");
  require(x_filter >= 0.0 && x_line >= 0.0 && r_line >= 0.0,
          "grid: reactances and resistance must be >= 0");
  require(x_eq() > 0.0 || r_eq() > 0.0, "grid: equivalent impedance is zero");
  require(std::isfinite(p_rated) && p_rated > 0.0, "grid: p_rated must be > 0");
}

double peak_phase_voltage(double v_line_rms) {
  return v_line_rms * std::numbers::sqrt2 / std::numbers::sqrt3;
}

GridParams make_grid(double v_line_rms, double f_nominal, double l_filter, double l_line,
                     double r_line, double p_rated) {
  GridParams g;
  g.v_grid_peak = peak_phase_voltage(v_line_rms);
  g.f_nominal = f_nominal;
  g.omega_nominal = 2.0 * std::numbers::pi * f_nominal;
  g.x_filter = g.omega_nominal * l_filter;
  g.x_line = g.omega_nominal * l_line;
  g.r_line = r_line;
  g.p_rated = p_rated;
  g.validate();
  return g;
}

void SwingParams::validate() const {
  require(std::isfinite(inertia_j) && inertia_j > 0.0, "swing: inertia_j must be > 0");
  require(std::isfinite(droop_d) && droop_d >= 0.0, "swing: droop_d must be >= 0");
  require(std::isfinite(k_i) && k_i > 0.0, "swing: k_i must be > 0");
  require(std::isfinite(d_v), "swing: d_v must be finite");
}

PowerPair exact_power_flow(double e, double v, double delta, double r_eq, double x_eq) {
  const double z2 = r_eq * r_eq + x_eq * x_eq;
  require(z2 > 0.0, "power flow: degenerate impedance (Z = 0)");
  require(e >= 0.0 && v >= 0.0, "power flow: voltages must be >= 0");
  const double ev = e * v;
  const double radial = (e * e - ev * std::cos(delta)) / z2;
  const double tangential = ev / z2 * std::sin(delta);
  return {0.5 * (radial * r_eq + tangential * x_eq), 0.5 * (radial * x_eq - tangential * r_eq)};
}

PowerPair approx_power_flow_inductive(double e, double v, double delta, double x_eq) {
  require(x_eq > 0.0, "power flow: x_eq must be > 0");
  return {e * v * std::sin(delta) / (2.0 * x_eq), e * (e - v * std::cos(delta)) / (2.0 * x_eq)};
}

PowerPair linearized_power_flow(double e, double v, double delta, double x_eq) {
  require(x_eq > 0.0, "power flow: x_eq must be > 0");
  return {e * v * delta / (2.0 * x_eq), e * (e - v) / (2.0 * x_eq)};
}

PowerPair to_three_phase(PowerPair per_phase) {
  return {kPhases * per_phase.p, kPhases * per_phase.q};
}

PowerPair total_power(const PlantState& state) {
  return to_three_phase({state.p_out, state.q_out});
}

double derive_droop_coefficient(double p_rated, double droop_fraction, double omega_nominal) {
  require(droop_fraction > 0.0, "droop: droop_fraction must be > 0");
  require(omega_nominal > 0.0, "droop: omega_nominal must be > 0");
  return p_rated / (droop_fraction * omega_nominal);
}

PlantState step_swing(const PlantState& state, double p_in, double p_out, const SwingParams& swing,
                      const GridParams& grid, double dt) {
  require(dt > 0.0, "swing: dt must be > 0");
  require(state.omega_i > 0.0, "swing: omega_i must be > 0");
  PlantState next = state;
  const double slip = state.omega_i - grid.omega_nominal;
  const double accel = (p_in - p_out - swing.droop_d * slip) / (swing.inertia_j * state.omega_i);
  next.omega_i = state.omega_i + accel * dt;
  next.delta = state.delta + (next.omega_i - grid.omega_nominal) * dt;
  return next;
}

PlantState plant_step(const PlantState& state, double e_command, double p_set,
                      const GridParams& grid, const SwingParams& swing, double dt) {
  if (!std::isfinite(e_command)) {
    throw CommandRangeError("plant: non-finite voltage command");
  }
  require(dt > 0.0, "plant: dt must be > 0");
  PlantState next = state;
  next.e_peak = std::clamp(e_command, 0.0, grid.command_limit());
  const PowerPair before =
      exact_power_flow(next.e_peak, grid.v_grid_peak, state.delta, grid.r_eq(), grid.x_eq());
  next = step_swing(next, p_set, to_three_phase(before).p, swing, grid, dt);
  const PowerPair after =
      exact_power_flow(next.e_peak, grid.v_grid_peak, next.delta, grid.r_eq(), grid.x_eq());
  next.p_out = after.p;
  next.q_out = after.q;
  return next;
}

PlantState initial_state(const GridParams& grid) {
  PlantState s;
  s.omega_i = grid.omega_nominal;
  s.delta = 0.0;
  s.e_peak = grid.v_grid_peak;
  const PowerPair pq = exact_power_flow(s.e_peak, grid.v_grid_peak, 0.0, grid.r_eq(), grid.x_eq());
  s.p_out = pq.p;
  s.q_out = pq.q;
  s.q_integrator = grid.v_grid_peak;
  return s;
}

}  // namespace vsg
