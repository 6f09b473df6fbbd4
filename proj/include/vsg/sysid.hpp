#pragma once

// Identification of the one-step state-transition network used by the
// DHP critic/action updates and by the predictive baseline.

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "vsg/adp_state.hpp"
#include "vsg/mlp.hpp"
#include "vsg/plant.hpp"

namespace vsg {

enum class GridTag { kInductive, kResistive };

std::string_view grid_tag_name(GridTag tag);
GridTag parse_grid_tag(std::string_view name);

/// Which integrator drives the inverter voltage while data is logged.
enum class ExcitationLoop {
  kReactive,  // the conventional Q -> E loop (pi_voltage_step)
  kActive,    // P -> E loop, for grids where the reactive loop slips poles
};

struct ExcitationOptions {
  ExcitationLoop loop = ExcitationLoop::kReactive;
  int hold_min = 50;  // control periods a reference pair is held
  int hold_max = 500;
  double p_min_fraction = 0.1;  // P_set ~ U[p_min, p_max] * p_rated
  double p_max_fraction = 1.0;
  double q_fraction = 0.5;  // Q_set ~ U[-q, q] * p_rated
  double dither = 0.0;      // V, uniform perturbation added to the logged command
  double active_gain = 1.0; // k_p of the active loop
};

struct SysIdSample {
  double t = 0.0;
  AdpVector x_now = AdpVector::Zero();
  double u_now = 0.0;  // applied (clamped) command, V
  References refs;
  AdpVector x_next = AdpVector::Zero();
  PlantState plant_before;  // lets the exact transition be replayed
};

struct SysIdDataset {
  std::vector<SysIdSample> samples;
  std::uint64_t seed = 0;
  GridTag grid_tag = GridTag::kInductive;
  double dt = 1e-3;
};

/// Closed-loop run under the chosen excitation loop with piecewise-constant
/// random references; one sample per control period. Deterministic in seed.
/// Throws GenerationError naming the step if the state becomes non-finite.
SysIdDataset generate_dataset(const GridParams& grid, const SwingParams& swing, int n_samples,
                              std::uint64_t seed, GridTag tag = GridTag::kInductive,
                              const ExcitationOptions& options = {}, double dt = 1e-3);

/// CSV: t,P,Q,ep,eQ,ef,theta,u,Pset,Qset (physical units, state before the step).
void write_dataset_csv(const SysIdDataset& data, std::ostream& out);

inline constexpr int kModelInputSize = kAdpStateSize + 3;

/// 9 -> 5 -> 5 -> 6 tanh network with the grid's model scalings attached.
Mlp make_system_network(const AdpScaling& scaling, std::uint64_t seed);

struct SysIdTrainOptions {
  int epochs = 100;
  double learning_rate = 0.05;
  /// Learning rate in the final epoch; geometric interpolation in between.
  /// Defaults to learning_rate (constant step).
  double learning_rate_final = -1.0;
  double holdout_fraction = 0.1;
  std::uint64_t shuffle_seed = 0;
};

struct LossHistory {
  std::vector<double> train;    // per-epoch mean squared error, normalized units
  std::vector<double> holdout;
};

struct SysIdFit {
  Mlp net;
  LossHistory history;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> holdout_indices;
};

/// Per-sample gradient descent on 0.5 * ||net(in) - target||^2 in normalized
/// coordinates, visiting the training split in a seeded shuffled order.
/// Throws ShapeError for a network that is not 9 -> ... -> 6 and TrainingError
/// for an empty dataset or a non-finite loss.
SysIdFit train_sysid(Mlp net, const SysIdDataset& data, const SysIdTrainOptions& options);

/// Seeded 90/10-style split used by train_sysid.
void split_indices(std::size_t n, double holdout_fraction, std::uint64_t seed,
                   std::vector<std::size_t>& train, std::vector<std::size_t>& holdout);

/// Model-network input in physical units: [X, u, P_set, Q_set].
Eigen::VectorXd model_input(const AdpVector& x, double u, References refs);

/// Per-channel RMSE in the model's normalized output units.
AdpVector normalized_rmse(const Mlp& net, const SysIdDataset& data,
                          std::span<const std::size_t> indices);

AdpState predict_next_state(const Mlp& net, const AdpState& x, double u, References refs);

struct ModelJacobians {
  Eigen::MatrixXd d_state;    // n x n, dX(t+1)/dX(t)
  Eigen::MatrixXd d_control;  // n x m, dX(t+1)/du(t)
};

/// Physical-unit Jacobians of predict_next_state.
ModelJacobians model_jacobians(const Mlp& net, const AdpState& x, double u, References refs);

/// P_set = P + e_p, Q_set = Q + e_q.
References implied_references(const AdpState& x);

/// Jacobians of x -> predict_next_state(x, u, implied_references(x)). With the
/// references read off the state, X is Markov for piecewise-constant
/// references; the fixed-reference partials of model_jacobians are not
/// identifiable from data, since P + e_p - P_set = 0 in every sample.
ModelJacobians state_jacobians(const Mlp& net, const AdpState& x, double u);

}  // namespace vsg
