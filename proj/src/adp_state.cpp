#include "vsg/adp_state.hpp"

#include <numbers>

#include "vsg/errors.hpp"

namespace vsg {

AdpVector AdpState::vector() const {
  AdpVector v;
  v << p, q, e_p, e_q, e_f, theta_i;
  return v;
}

AdpState AdpState::from_vector(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() != kAdpStateSize) throw ShapeError("AdpState: expected 6 entries");
  return {v(kP), v(kQ), v(kEp), v(kEq), v(kEf), v(kTheta)};
}

AdpState make_adp_state(const PlantState& plant, References refs, const GridParams& grid) {
  const PowerPair total = total_power(plant);
  AdpState x;
  x.p = total.p;
  x.q = total.q;
  x.e_p = refs.p_set - x.p;
  x.e_q = refs.q_set - x.q;
  x.e_f = grid.f_nominal - plant.omega_i / (2.0 * std::numbers::pi);
  x.theta_i = plant.delta;
  return x;
}

AffineScaling AdpScaling::state() const {
  AffineScaling s;
  s.offset = Eigen::VectorXd::Zero(kAdpStateSize);
  s.scale.resize(kAdpStateSize);
  s.scale << power_span, power_span, power_span, power_span, freq_span, angle_span;
  return s;
}

AffineScaling AdpScaling::model_input() const {
  const AffineScaling x = state();
  AffineScaling s;
  s.offset.resize(kAdpStateSize + 3);
  s.scale.resize(kAdpStateSize + 3);
  s.offset << x.offset, command_center, 0.0, 0.0;
  s.scale << x.scale, command_span, power_span, power_span;
  return s;
}

AdpScaling make_adp_scaling(const GridParams& grid, double freq_span) {
  grid.validate();
  if (!(freq_span > 0.0)) throw InvalidParameter("scaling: freq_span must be > 0");
  const double v = grid.v_grid_peak;
  // Peak phase current at rated apparent power.
  const double i_rated = 2.0 * grid.p_rated / (kPhases * v);
  AdpScaling s;
  s.power_span = grid.p_rated;
  s.freq_span = freq_span;
  s.angle_span = grid.z_eq() * i_rated / v;
  s.command_center = v;
  s.command_span = grid.z_eq() * i_rated;
  s.command_limit = grid.command_limit();
  return s;
}

}  // namespace vsg
