#pragma once

// Finite-menu predictive controller over a learned one-step model.

#include <functional>
#include <vector>

#include "vsg/adp_state.hpp"
#include "vsg/dhp.hpp"
#include "vsg/mlp.hpp"

namespace vsg {

struct NnpcConfig {
  int n_candidates = 10;
  double delta_e_max = 0.0;  // V; load_config defaults it to 2% of V_peak
  int horizon = 10;

  void validate() const;
};

inline constexpr double kDefaultNnpcDeltaFraction = 0.02;

/// Equally spaced commands over [e_now - delta_e_max, e_now + delta_e_max],
/// each clamped to [0, command_limit].
std::vector<double> nnpc_candidates(double e_now, const NnpcConfig& cfg, double command_limit);

/// (x, u, refs) -> predicted next state.
using StatePredictor = std::function<AdpState(const AdpState&, double, References)>;

/// Sum of U over `horizon` predicted steps with the command held at u.
double nnpc_rollout_cost(const StatePredictor& model, const AdpState& x, References refs, double u,
                         int horizon, const UtilityWeights& w);

/// Argmin of the rollout cost over the candidate menu; ties go to the
/// candidate closest to e_now.
double nnpc_control(const StatePredictor& model, const AdpState& x, References refs, double e_now,
                    const NnpcConfig& cfg, const UtilityWeights& w, double command_limit);

/// Identified-network form. Throws ShapeError unless the model maps 9 inputs
/// to 6 outputs.
double nnpc_control(const Mlp& model, const AdpState& x, References refs, double e_now,
                    const NnpcConfig& cfg, const UtilityWeights& w, double command_limit);

}  // namespace vsg
