#include "vsg/nnpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vsg/errors.hpp"
#include "vsg/sysid.hpp"

namespace vsg {

void NnpcConfig::validate() const {
  if (n_candidates < 2) throw InvalidParameter("nnpc: n_candidates must be >= 2");
  if (!(delta_e_max > 0.0)) throw InvalidParameter("nnpc: delta_e_max must be > 0");
  if (horizon < 1) throw InvalidParameter("nnpc: horizon must be >= 1");
}

std::vector<double> nnpc_candidates(double e_now, const NnpcConfig& cfg, double command_limit) {
  cfg.validate();
  std::vector<double> out(static_cast<std::size_t>(cfg.n_candidates));
  const double step = 2.0 * cfg.delta_e_max / (cfg.n_candidates - 1);
  for (int i = 0; i < cfg.n_candidates; ++i) {
    out[static_cast<std::size_t>(i)] =
        std::clamp(e_now - cfg.delta_e_max + step * i, 0.0, command_limit);
  }
  return out;
}

double nnpc_rollout_cost(const StatePredictor& model, const AdpState& x, References refs, double u,
                         int horizon, const UtilityWeights& w) {
  double cost = 0.0;
  AdpState s = x;
  for (int k = 0; k < horizon; ++k) {
    s = model(s, u, refs);
    cost += utility(s, w);
  }
  return cost;
}

double nnpc_control(const StatePredictor& model, const AdpState& x, References refs, double e_now,
                    const NnpcConfig& cfg, const UtilityWeights& w, double command_limit) {
  const std::vector<double> menu = nnpc_candidates(e_now, cfg, command_limit);
  double best = menu.front();
  double best_cost = std::numeric_limits<double>::infinity();
  for (double c : menu) {
    const double cost = nnpc_rollout_cost(model, x, refs, c, cfg.horizon, w);
    if (!std::isfinite(cost)) continue;
    if (cost < best_cost ||
        (cost == best_cost && std::abs(c - e_now) < std::abs(best - e_now))) {
      best = c;
      best_cost = cost;
    }
  }
  return best;
}

double nnpc_control(const Mlp& model, const AdpState& x, References refs, double e_now,
                    const NnpcConfig& cfg, const UtilityWeights& w, double command_limit) {
  if (model.input_size() != kModelInputSize || model.output_size() != kAdpStateSize) {
    throw ShapeError("nnpc_control: model must map 9 inputs to 6 outputs");
  }
  const StatePredictor predictor = [&model](const AdpState& s, double u, References r) {
    return predict_next_state(model, s, u, r);
  };
  return nnpc_control(predictor, x, refs, e_now, cfg, w, command_limit);
}

}  // namespace vsg
