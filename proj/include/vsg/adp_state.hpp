#pragma once

// The six-element state seen by the learned controllers,
// X = [P, Q, e_p, e_q, e_f, theta], plus the exogenous references and the
// affine scalings that map these physical quantities to roughly [-1, 1].

#include <Eigen/Core>

#include "vsg/mlp.hpp"
#include "vsg/plant.hpp"

namespace vsg {

inline constexpr int kAdpStateSize = 6;
using AdpVector = Eigen::Matrix<double, kAdpStateSize, 1>;

/// Indices into AdpVector.
enum AdpIndex : int { kP = 0, kQ = 1, kEp = 2, kEq = 3, kEf = 4, kTheta = 5 };

struct References {
  double p_set = 0.0;  // W, three-phase
  double q_set = 0.0;  // var, three-phase

  bool operator==(const References&) const = default;
};

struct AdpState {
  double p = 0.0;        // W, three-phase
  double q = 0.0;        // var, three-phase
  double e_p = 0.0;      // W, p_set - p
  double e_q = 0.0;      // var, q_set - q
  double e_f = 0.0;      // Hz, f_g - f
  double theta_i = 0.0;  // rad, power angle

  AdpVector vector() const;
  static AdpState from_vector(const Eigen::Ref<const Eigen::VectorXd>& v);
};

/// Builds the controller state from the plant. Errors are formed here, so
/// e_p == p_set - p and e_q == q_set - q hold exactly.
AdpState make_adp_state(const PlantState& plant, References refs, const GridParams& grid);

/// Normalization spans derived from the grid.
///  - powers and power errors: p_rated
///  - frequency error: freq_span (Hz)
///  - angle: the angle across Z_eq at rated current, 2 S |Z| / (3 V^2)
///  - voltage command: centred on V, span = the voltage drop across Z_eq at
///    rated current
struct AdpScaling {
  double power_span = 1.0;
  double freq_span = 1.0;
  double angle_span = 1.0;
  double command_center = 0.0;
  double command_span = 1.0;
  double command_limit = 0.0;

  AffineScaling state() const;
  /// System-network input: [X (6), u, P_set, Q_set].
  AffineScaling model_input() const;
  AffineScaling model_output() const { return state(); }
};

/// Default frequency-error span, Hz.
inline constexpr double kDefaultFreqSpan = 0.1;

AdpScaling make_adp_scaling(const GridParams& grid, double freq_span = kDefaultFreqSpan);

}  // namespace vsg
