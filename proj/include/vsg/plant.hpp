#pragma once

// Averaged per-phase phasor model of a grid-connected synchronverter:
// power-flow algebra across the filter/line impedance, the virtual-rotor swing
// equation, and the fixed-step update used by every controller.

namespace vsg {

/// Number of phases. The power-flow formulas are per phase; references,
/// utilities and the swing equation work on three-phase totals.
inline constexpr int kPhases = 3;

/// Upper command clamp as a multiple of the grid peak phase voltage.
inline constexpr double kCommandCeiling = 1.5;

struct GridParams {
  double v_grid_peak = 0.0;    // V, peak phase voltage
  double omega_nominal = 0.0;  // rad/s
  double f_nominal = 0.0;      // Hz
  double x_filter = 0.0;       // ohm at nominal frequency
  double x_line = 0.0;         // ohm at nominal frequency
  double r_line = 0.0;         // ohm
  double p_rated = 0.0;        // W, three-phase rating

  double x_eq() const { return x_filter + x_line; }
  double r_eq() const { return r_line; }
  double z_eq() const;
  /// Largest admissible inverter voltage command.
  double command_limit() const { return kCommandCeiling * v_grid_peak; }

  /// Throws InvalidParameter on negative elements, a zero impedance or an
  /// inconsistent omega/f pair.
  void validate() const;
};

/// Peak phase voltage from a line-to-line RMS value: V_ll * sqrt(2) / sqrt(3).
double peak_phase_voltage(double v_line_rms);

/// Builds grid parameters from inductances (H) and resistance (ohm); the
/// reactances are evaluated at f_nominal.
GridParams make_grid(double v_line_rms, double f_nominal, double l_filter, double l_line,
                     double r_line, double p_rated);

struct SwingParams {
  double inertia_j = 0.0;  // kg m^2
  double droop_d = 0.0;    // W s / rad
  double k_i = 0.0;        // reactive integrator coefficient
  double d_v = 0.0;        // voltage droop

  void validate() const;
};

struct PlantState {
  double omega_i = 0.0;       // rad/s, virtual rotor speed
  double delta = 0.0;         // rad, inverter angle relative to the grid
  double e_peak = 0.0;        // V, inverter peak phase voltage
  double p_out = 0.0;         // W per phase
  double q_out = 0.0;         // var per phase
  double q_integrator = 0.0;  // V, mirror of the reactive integrator (PI runs only)
};

struct PowerPair {
  double p = 0.0;
  double q = 0.0;
};

/// Exact per-phase active/reactive power delivered through R_eq + jX_eq.
PowerPair exact_power_flow(double e, double v, double delta, double r_eq, double x_eq);

/// Inductive-line estimate: P = EV sin(delta) / 2X, Q = E (E - V cos(delta)) / 2X.
PowerPair approx_power_flow_inductive(double e, double v, double delta, double x_eq);

/// Small-angle form of the inductive estimate: P = EV delta / 2X, Q = E (E - V) / 2X.
PowerPair linearized_power_flow(double e, double v, double delta, double x_eq);

/// Per-phase to three-phase total. The only place the phase count is applied.
PowerPair to_three_phase(PowerPair per_phase);

/// Three-phase total output of a plant state.
PowerPair total_power(const PlantState& state);

/// D = p_rated / (droop_fraction * omega_nominal).
double derive_droop_coefficient(double p_rated, double droop_fraction, double omega_nominal);

/// One step of the swing equation J w dw/dt = P_in - P_out - D (w - w_g).
/// The rotor speed is advanced with forward Euler and the angle is then
/// integrated with the updated slip (semi-implicit Euler). p_in and p_out are
/// three-phase totals. Only omega_i and delta change.
PlantState step_swing(const PlantState& state, double p_in, double p_out, const SwingParams& swing,
                      const GridParams& grid, double dt);

/// Applies a voltage command for one control period: clamps the command to
/// [0, command_limit], advances the swing equation with P_in = p_set (total),
/// and refreshes the measured per-phase P/Q at the new angle.
/// Throws CommandRangeError on a non-finite command.
PlantState plant_step(const PlantState& state, double e_command, double p_set,
                      const GridParams& grid, const SwingParams& swing, double dt);

/// Synchronised, unloaded start: w = w_g, delta = 0, E = V, P = Q = 0.
PlantState initial_state(const GridParams& grid);

}  // namespace vsg
