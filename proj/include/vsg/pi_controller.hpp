#pragma once

// Conventional synchronverter voltage channel:
//   E = (1/K_i) * integral(Q_set - Q) dt - D_v * (V_ref - V_meas)

namespace vsg {

struct PiState {
  double q_integral = 0.0;  // V
};

struct PiOutput {
  PiState state;
  double e_command = 0.0;  // V
};

/// One control period of the reactive-power/voltage loop. The integral is
/// advanced with forward Euler before the command is formed.
PiOutput pi_voltage_step(PiState pi, double q_set, double q_meas, double v_ref, double v_meas,
                         double k_i, double d_v, double dt);

/// Active-power variant, E = (1/k_p) * integral(P_set - P) dt. Used only to
/// excite resistive grids during identification, where the reactive loop
/// cannot hold synchronism.
PiOutput pi_active_voltage_step(PiState pi, double p_set, double p_meas, double k_p, double dt);

}  // namespace vsg
