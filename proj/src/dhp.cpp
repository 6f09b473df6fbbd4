#include "vsg/dhp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "vsg/errors.hpp"
#include "vsg/random.hpp"

namespace vsg {

void UtilityWeights::validate() const {
  if (!(k_p >= 0.0 && k_q >= 0.0 && k_f >= 0.0)) {
    throw InvalidParameter("utility weights must be >= 0");
  }
  if (!(k_p > 0.0 || k_q > 0.0 || k_f > 0.0)) {
    throw InvalidParameter("at least one utility weight must be > 0");
  }
}

void DhpConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidParameter("dhp: gamma must be in (0, 1]");
  if (!(lr_critic > 0.0) || !(lr_action > 0.0)) {
    throw InvalidParameter("dhp: learning rates must be > 0");
  }
  if (episodes < 0 || steps_per_episode < 0) {
    throw InvalidParameter("dhp: episodes and steps must be >= 0");
  }
  if (!(epsilon_u > 0.0)) throw InvalidParameter("dhp: epsilon_u must be > 0");
  if (!(exploration >= 0.0)) throw InvalidParameter("dhp: exploration must be >= 0");
  if (!(lr_final_fraction > 0.0 && lr_final_fraction <= 1.0)) {
    throw InvalidParameter("dhp: lr_final_fraction must be in (0, 1]");
  }
}

double utility(const AdpState& x, const UtilityWeights& w) {
  return std::sqrt(w.k_p * x.e_p * x.e_p + w.k_q * x.e_q * x.e_q + w.k_f * x.e_f * x.e_f);
}

AdpVector utility_gradient(const AdpState& x, const UtilityWeights& w, double epsilon_u) {
  AdpVector g = AdpVector::Zero();
  const double u = utility(x, w);
  if (u < epsilon_u) return g;
  g(kEp) = w.k_p * x.e_p / u;
  g(kEq) = w.k_q * x.e_q / u;
  g(kEf) = w.k_f * x.e_f / u;
  return g;
}

Eigen::VectorXd critic_target(const Eigen::VectorXd& lambda_next, const Eigen::MatrixXd& d_state,
                              const Eigen::MatrixXd& d_control,
                              const Eigen::MatrixXd& action_jacobian,
                              const Eigen::VectorXd& utility_grad, double gamma) {
  const Eigen::Index n = lambda_next.size();
  if (d_state.rows() != n || d_state.cols() != n || d_control.rows() != n ||
      action_jacobian.rows() != d_control.cols() || action_jacobian.cols() != n ||
      utility_grad.size() != n) {
    throw ShapeError("critic_target: inconsistent dimensions");
  }
  const Eigen::MatrixXd closed_loop = d_state + d_control * action_jacobian;
  return utility_grad + gamma * (closed_loop.transpose() * lambda_next);
}

double critic_train_step(Mlp& critic, const Eigen::VectorXd& x_now, const Eigen::VectorXd& x_next,
                         const ModelJacobians& jac, const Eigen::MatrixXd& action_jacobian,
                         const Eigen::VectorXd& utility_grad, double gamma, double learning_rate) {
  const Eigen::VectorXd lambda_now = evaluate(critic, x_now);
  const Eigen::VectorXd lambda_next = evaluate(critic, x_next);
  const Eigen::VectorXd target = critic_target(lambda_next, jac.d_state, jac.d_control,
                                               action_jacobian, utility_grad, gamma);
  if (!target.allFinite()) throw TrainingError("dhp: non-finite critic target");
  const Eigen::VectorXd& s = critic.output_scaling.scale;
  const Eigen::VectorXd err_norm = (lambda_now - target).cwiseQuotient(s);
  // d(0.5 ||err_norm||^2) / d lambda_physical
  const Eigen::VectorXd dloss = err_norm.cwiseQuotient(s);
  apply_sgd(critic, backward_physical(critic, x_now, dloss), learning_rate);
  return err_norm.norm();
}

double critic_train_step(Mlp& critic, const AdpState& x_now, const AdpState& x_next,
                         const ModelJacobians& jac, const Eigen::MatrixXd& action_jacobian,
                         const UtilityWeights& w, const DhpConfig& cfg) {
  const Eigen::VectorXd grad = utility_gradient(x_now, w, cfg.epsilon_u);
  return critic_train_step(critic, x_now.vector(), x_next.vector(), jac, action_jacobian, grad,
                           cfg.gamma, cfg.lr_critic);
}

Eigen::VectorXd action_train_step(Mlp& action, const Mlp& critic, const TransitionModel& model,
                                  const Eigen::VectorXd& x_now, const Eigen::VectorXd& utility_du,
                                  double gamma, double learning_rate, double value_span) {
  const Eigen::VectorXd u = evaluate(action, x_now);
  if (utility_du.size() != u.size()) throw ShapeError("action_train_step: utility_du size");
  const TransitionLinearization lin = model(x_now, u);
  const Eigen::VectorXd lambda_next = evaluate(critic, lin.x_next);
  if (lin.jac.d_control.rows() != lambda_next.size() || lin.jac.d_control.cols() != u.size()) {
    throw ShapeError("action_train_step: model Jacobian does not match critic/action");
  }
  const Eigen::VectorXd djdu = utility_du + gamma * (lin.jac.d_control.transpose() * lambda_next);
  if (!djdu.allFinite()) throw TrainingError("dhp: non-finite action pseudo-gradient");
  apply_sgd(action, backward_physical(action, x_now, djdu / value_span), learning_rate);
  return djdu;
}

double action_train_step(Mlp& action, const Mlp& critic, const Mlp& model, const AdpState& x_now,
                         References refs, const DhpConfig& cfg, double value_span) {
  const TransitionModel transition = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    const AdpState xs = AdpState::from_vector(x);
    TransitionLinearization lin;
    lin.x_next = predict_next_state(model, xs, u(0), refs).vector();
    lin.jac = state_jacobians(model, xs, u(0));
    return lin;
  };
  const Eigen::VectorXd none = Eigen::VectorXd::Zero(1);
  return action_train_step(action, critic, transition, x_now.vector(), none, cfg.gamma,
                           cfg.lr_action, value_span)(0);
}

double dhp_control_step(const Mlp& action, const AdpState& x) {
  const double raw = evaluate(action, x.vector())(0);
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  if (action.output_activation == Activation::kTanh) {
    lo = std::max(0.0, action.output_scaling.offset(0) - action.output_scaling.scale(0));
    hi = action.output_scaling.offset(0) + action.output_scaling.scale(0);
  }
  if (!std::isfinite(raw)) return lo;
  return std::clamp(raw, lo, hi);
}

double value_span(const AdpScaling& scaling, double gamma) {
  const double horizon = gamma < 1.0 ? std::min(1.0 / (1.0 - gamma), kMaxHorizonSteps)
                                     : kMaxHorizonSteps;
  return scaling.power_span * horizon;
}

Mlp make_critic_network(const AdpScaling& scaling, double gamma, std::uint64_t seed) {
  const int sizes[] = {kAdpStateSize, 8, 8, kAdpStateSize};
  Mlp net = init_mlp(sizes, Activation::kTanh, Activation::kIdentity, seed);
  net.input_scaling = scaling.state();
  const double span = value_span(scaling, gamma);
  net.output_scaling.offset = Eigen::VectorXd::Zero(kAdpStateSize);
  net.output_scaling.scale = span * scaling.state().scale.cwiseInverse();
  return net;
}

Mlp make_action_network(const AdpScaling& scaling, std::uint64_t seed, double band) {
  if (!(band > 0.0)) throw InvalidParameter("action band must be > 0");
  const double center = scaling.command_center;
  const double half = std::min({band * scaling.command_span, scaling.command_limit - center, center});
  if (!(half > 0.0)) throw InvalidParameter("action band is empty");
  const int sizes[] = {kAdpStateSize, 8, 8, 1};
  Mlp net = init_mlp(sizes, Activation::kTanh, Activation::kTanh, seed);
  net.input_scaling = scaling.state();
  net.output_scaling.offset = Eigen::VectorXd::Constant(1, center);
  net.output_scaling.scale = Eigen::VectorXd::Constant(1, half);
  net.weights.back() *= kActionOutputInitScale;
  return net;
}

DhpTrainResult train_dhp(Mlp action, Mlp critic, const DhpProblem& problem, const DhpConfig& cfg,
                         std::uint64_t seed) {
  cfg.validate();
  problem.weights.validate();
  if (action.input_size() != kAdpStateSize || action.output_size() != 1) {
    throw ShapeError("train_dhp: action network must map 6 inputs to 1 output");
  }
  if (critic.input_size() != kAdpStateSize || critic.output_size() != kAdpStateSize) {
    throw ShapeError("train_dhp: critic network must map 6 inputs to 6 outputs");
  }
  const auto& grid = problem.grid;
  const auto& ref_opts = problem.references;
  const double span = value_span(problem.scaling, cfg.gamma);
  Rng rng(seed);
  DhpTrainResult result;

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const double progress = static_cast<double>(ep) / std::max(cfg.episodes, 1);
    const double explore = cfg.exploration * (1.0 - progress);
    DhpConfig step_cfg = cfg;
    if (cfg.episodes > 1) {
      const double decay =
          std::pow(cfg.lr_final_fraction, static_cast<double>(ep) / (cfg.episodes - 1));
      step_cfg.lr_critic *= decay;
      step_cfg.lr_action *= decay;
    }
    PlantState plant = initial_state(grid);
    References refs;
    std::int64_t hold = 0;
    double sum_u = 0.0;
    double sum_err = 0.0;
    for (int k = 0; k < cfg.steps_per_episode; ++k) {
      if (hold == 0) {
        refs.p_set = rng.uniform(ref_opts.p_min_fraction, ref_opts.p_max_fraction) * grid.p_rated;
        refs.q_set = rng.uniform(-ref_opts.q_fraction, ref_opts.q_fraction) * grid.p_rated;
        hold = rng.uniform_int(ref_opts.hold_min, ref_opts.hold_max);
      }
      --hold;
      const AdpState x = make_adp_state(plant, refs, grid);
      double u = dhp_control_step(action, x);
      if (explore > 0.0) u += rng.uniform(-explore, explore);
      u = std::clamp(u, 0.0, grid.command_limit());

      const PlantState next = plant_step(plant, u, refs.p_set, grid, problem.swing, problem.dt);
      const AdpState x_next = make_adp_state(next, refs, grid);
      if (!x_next.vector().allFinite() || !std::isfinite(next.omega_i)) {
        throw TrainingError("dhp: plant diverged in episode " + std::to_string(ep) + " step " +
                            std::to_string(k));
      }
      try {
        const ModelJacobians jac = state_jacobians(problem.model, x, u);
        const Eigen::MatrixXd dudx = evaluate_jacobian(action, x.vector());
        sum_err += critic_train_step(critic, x, x_next, jac, dudx, problem.weights, step_cfg);
        action_train_step(action, critic, problem.model, x, refs, step_cfg, span);
      } catch (const TrainingError& e) {
        throw TrainingError(std::string(e.what()) + " (episode " + std::to_string(ep) + " step " +
                            std::to_string(k) + ")");
      }
      sum_u += utility(x_next, problem.weights);
      plant = next;
    }
    const double n = std::max(cfg.steps_per_episode, 1);
    DhpLogRow row{ep, sum_u / n, sum_err / n};
    if (!std::isfinite(row.mean_critic_error) || !action.weights.back().allFinite() ||
        !critic.weights.back().allFinite()) {
      throw TrainingError("dhp: weights diverged in episode " + std::to_string(ep));
    }
    result.log.push_back(row);
  }
  result.action = std::move(action);
  result.critic = std::move(critic);
  return result;
}

void write_training_log_csv(const std::vector<DhpLogRow>& log, std::ostream& out) {
  out << "episode,mean_utility,mean_critic_error\n";
  char buf[128];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", r.episode, r.mean_utility,
                  r.mean_critic_error);
    out << buf;
  }
}

}  // namespace vsg
