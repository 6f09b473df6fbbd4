#pragma once

// Central finite-difference checks of the analytic network derivatives.

#include <cstdint>

#include "vsg/adp_state.hpp"
#include "vsg/mlp.hpp"

namespace vsg {

struct GradcheckReport {
  int cases = 0;
  double max_weight_error = 0.0;    // backward vs FD
  double max_jacobian_error = 0.0;  // input_jacobian vs FD
};

/// Relative error |a - b| / max(|a|, |b|, kGradcheckFloor).
inline constexpr double kGradcheckFloor = 1e-4;
double gradcheck_relative_error(double analytic, double numeric, double floor = kGradcheckFloor);

/// Random nets with 1-3 layers of width 1-8 and random activations; loss is a
/// random linear functional of the output. Step 1e-6.
GradcheckReport check_mlp_gradients(int n_nets, std::uint64_t seed);

/// model_jacobians vs central differences of predict_next_state on a random
/// 9 -> 5 -> 5 -> 6 network. Steps and the error floor are taken per entry in
/// the network's normalized units.
double check_model_jacobians(const AdpScaling& scaling, int n_points, std::uint64_t seed);

}  // namespace vsg
