#include "vsg/pi_controller.hpp"

#include "vsg/errors.hpp"

namespace vsg {

PiOutput pi_voltage_step(PiState pi, double q_set, double q_meas, double v_ref, double v_meas,
                         double k_i, double d_v, double dt) {
  if (!(k_i > 0.0)) throw InvalidParameter("pi: k_i must be > 0");
  if (!(dt > 0.0)) throw InvalidParameter("pi: dt must be > 0");
  const double dq = q_set - q_meas;
  pi.q_integral += dq / k_i * dt;
  const double dv = v_ref - v_meas;
  return {pi, pi.q_integral - d_v * dv};
}

PiOutput pi_active_voltage_step(PiState pi, double p_set, double p_meas, double k_p, double dt) {
  if (!(k_p > 0.0)) throw InvalidParameter("pi: k_p must be > 0");
  if (!(dt > 0.0)) throw InvalidParameter("pi: dt must be > 0");
  pi.q_integral += (p_set - p_meas) / k_p * dt;
  return {pi, pi.q_integral};
}

}  // namespace vsg
