#pragma once

// Dual heuristic programming: the critic approximates the costate
// lambda = dJ/dX of the discounted cost-to-go J(t) = sum_k gamma^k U(t+k), and
// the action network is trained with the critic's costate propagated through
// the identified model.
//
// The generic routines work on plain vectors so they can drive any
// (state, control) problem; the AdpState overloads bind them to the
// synchronverter.

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "vsg/adp_state.hpp"
#include "vsg/mlp.hpp"
#include "vsg/plant.hpp"
#include "vsg/sysid.hpp"

namespace vsg {

struct UtilityWeights {
  double k_p = 1.0;
  double k_q = 1.0;
  double k_f = 0.0;

  void validate() const;
};

struct DhpConfig {
  double gamma = 0.95;
  double lr_critic = 1e-3;
  double lr_action = 1e-3;
  int episodes = 20;
  int steps_per_episode = 2000;
  /// Below this utility (W) the utility gradient is taken as zero.
  double epsilon_u = 1e-6;
  /// Initial half-width (V) of the uniform exploration added to the action
  /// during training; annealed linearly to zero over the episodes.
  double exploration = 0.0;
  /// Learning rates in the last episode as a fraction of lr_critic/lr_action;
  /// geometric interpolation across episodes. 1 keeps them constant.
  double lr_final_fraction = 1.0;

  void validate() const;
};

/// U = sqrt(k_p e_p^2 + k_q e_q^2 + k_f e_f^2).
double utility(const AdpState& x, const UtilityWeights& w);

/// dU/dX. The P, Q and theta entries are zero because the errors are carried
/// as separate state entries. Returns zero when U < epsilon_u.
AdpVector utility_gradient(const AdpState& x, const UtilityWeights& w, double epsilon_u);

/// target_j = dU/dX_j + gamma * sum_i lambda_next_i *
///            (dX'_i/dX_j + sum_k dX'_i/du_k du_k/dX_j)
/// utility_grad is the total derivative of the immediate cost w.r.t. X(t)
/// (include dU/du * du/dX when the utility depends on the control).
Eigen::VectorXd critic_target(const Eigen::VectorXd& lambda_next, const Eigen::MatrixXd& d_state,
                              const Eigen::MatrixXd& d_control,
                              const Eigen::MatrixXd& action_jacobian,
                              const Eigen::VectorXd& utility_grad, double gamma);

/// One gradient step of 0.5 * ||e_c||^2 with e_c = critic(x_now) - target, the
/// target computed from critic(x_next) and held fixed. Errors are measured in
/// the critic's normalized output units; returns ||e_c|| in those units.
/// Throws TrainingError if the target is not finite.
double critic_train_step(Mlp& critic, const Eigen::VectorXd& x_now, const Eigen::VectorXd& x_next,
                         const ModelJacobians& jac, const Eigen::MatrixXd& action_jacobian,
                         const Eigen::VectorXd& utility_grad, double gamma, double learning_rate);

double critic_train_step(Mlp& critic, const AdpState& x_now, const AdpState& x_next,
                         const ModelJacobians& jac, const Eigen::MatrixXd& action_jacobian,
                         const UtilityWeights& w, const DhpConfig& cfg);

struct TransitionLinearization {
  Eigen::VectorXd x_next;
  ModelJacobians jac;
};

/// (x, u) -> predicted next state and its Jacobians.
using TransitionModel =
    std::function<TransitionLinearization(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

/// One descent step of the action network along dJ(t)/du(t) =
/// utility_du + gamma * (dX'/du)^T lambda(X'), where X' is the model's
/// prediction from the action's own output and lambda comes from the critic.
/// The loss is J / value_span. Returns dJ/du. Throws TrainingError if the
/// pseudo-gradient is not finite.
Eigen::VectorXd action_train_step(Mlp& action, const Mlp& critic, const TransitionModel& model,
                                  const Eigen::VectorXd& x_now, const Eigen::VectorXd& utility_du,
                                  double gamma, double learning_rate, double value_span);

/// Synchronverter form: the identified network is the model, references are
/// held over the step, and the utility does not depend on the control.
double action_train_step(Mlp& action, const Mlp& critic, const Mlp& model, const AdpState& x_now,
                         References refs, const DhpConfig& cfg, double value_span);

/// Clamped voltage command from the action network. The admissible range is
/// the network's squashed output range [offset - scale, offset + scale]
/// intersected with [0, inf).
double dhp_control_step(const Mlp& action, const AdpState& x);

/// Cost-to-go scale used to normalize critic outputs and action gradients:
/// power_span * min(1 / (1 - gamma), kMaxHorizonSteps).
inline constexpr double kMaxHorizonSteps = 1000.0;
double value_span(const AdpScaling& scaling, double gamma);

/// 6 -> 8 -> 8 -> 6 tanh critic; outputs lambda_i scaled by value_span / span_i.
Mlp make_critic_network(const AdpScaling& scaling, double gamma, std::uint64_t seed);

/// 6 -> 8 -> 8 -> 1 tanh action squashed onto the band
/// command_center +- min(band * command_span, command_limit - command_center),
/// which always lies inside [0, command_limit]. The output layer starts at
/// kActionOutputInitScale of the default initialisation, so the untrained
/// network commands E close to V.
inline constexpr double kDefaultActionBand = 4.0;
inline constexpr double kActionOutputInitScale = 0.1;
Mlp make_action_network(const AdpScaling& scaling, std::uint64_t seed,
                        double band = kDefaultActionBand);

struct DhpProblem {
  GridParams grid;
  SwingParams swing;
  AdpScaling scaling;
  Mlp model;
  UtilityWeights weights;
  ExcitationOptions references;  // reference schedule family (loop/dither unused)
  double dt = 1e-3;
};

struct DhpLogRow {
  int episode = 0;
  double mean_utility = 0.0;
  double mean_critic_error = 0.0;
};

struct DhpTrainResult {
  Mlp action;
  Mlp critic;
  std::vector<DhpLogRow> log;
};

/// Online training on the simulated plant: every control period applies the
/// (explored) action, takes one critic step on the observed transition and
/// then one action step. Each episode restarts from initial_state with a fresh
/// random reference schedule. Deterministic in seed. Throws TrainingError with
/// the episode/step index on divergence.
DhpTrainResult train_dhp(Mlp action, Mlp critic, const DhpProblem& problem, const DhpConfig& cfg,
                         std::uint64_t seed);

/// CSV: episode,mean_utility,mean_critic_error
void write_training_log_csv(const std::vector<DhpLogRow>& log, std::ostream& out);

}  // namespace vsg
