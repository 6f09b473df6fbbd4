#include "vsg/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

#include "vsg/errors.hpp"
#include "vsg/pi_controller.hpp"
#include "vsg/random.hpp"

namespace vsg {

namespace {

bool all_finite(const AdpVector& v) { return v.allFinite(); }

void check_model_net(const Mlp& net) {
  if (net.input_size() != kModelInputSize || net.output_size() != kAdpStateSize) {
    throw ShapeError("sysid: system network must map 9 inputs to 6 outputs");
  }
}

}  // namespace

std::string_view grid_tag_name(GridTag tag) {
  return tag == GridTag::kInductive ? "inductive" : "resistive";
}

GridTag parse_grid_tag(std::string_view name) {
  if (name == "inductive") return GridTag::kInductive;
  if (name == "resistive") return GridTag::kResistive;
  throw InvalidParameter("unknown grid '" + std::string(name) + "'");
}

SysIdDataset generate_dataset(const GridParams& grid, const SwingParams& swing, int n_samples,
                              std::uint64_t seed, GridTag tag, const ExcitationOptions& options,
                              double dt) {
  if (n_samples < 1) throw InvalidParameter("sysid: n_samples must be >= 1");
  if (options.hold_min < 1 || options.hold_max < options.hold_min) {
    throw InvalidParameter("sysid: invalid hold range");
  }
  grid.validate();
  swing.validate();

  SysIdDataset data;
  data.seed = seed;
  data.grid_tag = tag;
  data.dt = dt;
  data.samples.reserve(static_cast<std::size_t>(n_samples));

  Rng rng(seed);
  PlantState plant = initial_state(grid);
  PiState pi{grid.v_grid_peak};
  double e_prev = grid.v_grid_peak;
  References refs;
  std::int64_t hold = 0;

  for (int k = 0; k < n_samples; ++k) {
    if (hold == 0) {
      refs.p_set = rng.uniform(options.p_min_fraction, options.p_max_fraction) * grid.p_rated;
      refs.q_set = rng.uniform(-options.q_fraction, options.q_fraction) * grid.p_rated;
      hold = rng.uniform_int(options.hold_min, options.hold_max);
    }
    --hold;

    const AdpState x_now = make_adp_state(plant, refs, grid);
    PiOutput out;
    if (options.loop == ExcitationLoop::kReactive) {
      out = pi_voltage_step(pi, refs.q_set, x_now.q, grid.v_grid_peak, e_prev, swing.k_i,
                            swing.d_v, dt);
    } else {
      out = pi_active_voltage_step(pi, refs.p_set, x_now.p, options.active_gain, dt);
    }
    pi = out.state;
    double u = out.e_command;
    if (options.dither > 0.0) u += rng.uniform(-options.dither, options.dither);
    if (!std::isfinite(u)) {
      throw GenerationError("sysid: non-finite command at step " + std::to_string(k));
    }
    u = std::clamp(u, 0.0, grid.command_limit());

    SysIdSample s;
    s.t = k * dt;
    s.x_now = x_now.vector();
    s.u_now = u;
    s.refs = refs;
    s.plant_before = plant;

    try {
      plant = plant_step(plant, u, refs.p_set, grid, swing, dt);
    } catch (const InvalidParameter& e) {
      throw GenerationError("sysid: plant left its valid range at step " + std::to_string(k) +
                            " (" + e.what() + ")");
    }
    plant.q_integrator = pi.q_integral;
    e_prev = u;
    s.x_next = make_adp_state(plant, refs, grid).vector();
    if (!all_finite(s.x_next) || !std::isfinite(plant.omega_i)) {
      throw GenerationError("sysid: state became non-finite at step " + std::to_string(k));
    }
    data.samples.push_back(s);
  }
  return data;
}

void write_dataset_csv(const SysIdDataset& data, std::ostream& out) {
  out << "t,P,Q,ep,eQ,ef,theta,u,Pset,Qset\n";
  char buf[512];
  for (const auto& s : data.samples) {
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t,
                  s.x_now(kP), s.x_now(kQ), s.x_now(kEp), s.x_now(kEq), s.x_now(kEf),
                  s.x_now(kTheta), s.u_now, s.refs.p_set, s.refs.q_set);
    out << buf;
  }
}

Mlp make_system_network(const AdpScaling& scaling, std::uint64_t seed) {
  const int sizes[] = {kModelInputSize, 5, 5, kAdpStateSize};
  Mlp net = init_mlp(sizes, Activation::kTanh, Activation::kIdentity, seed);
  net.input_scaling = scaling.model_input();
  net.output_scaling = scaling.model_output();
  return net;
}

Eigen::VectorXd model_input(const AdpVector& x, double u, References refs) {
  Eigen::VectorXd in(kModelInputSize);
  in << x, u, refs.p_set, refs.q_set;
  return in;
}

void split_indices(std::size_t n, double holdout_fraction, std::uint64_t seed,
                   std::vector<std::size_t>& train, std::vector<std::size_t>& holdout) {
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw InvalidParameter("sysid: holdout_fraction must be in [0, 1)");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
    std::swap(order[i - 1], order[j]);
  }
  const auto n_holdout = static_cast<std::size_t>(std::floor(holdout_fraction * n));
  holdout.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_holdout));
  train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_holdout), order.end());
}

namespace {

double mean_squared_error(const Mlp& net, const SysIdDataset& data,
                          std::span<const std::size_t> indices) {
  if (indices.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i : indices) {
    const auto& s = data.samples[i];
    const Eigen::VectorXd in = net.input_scaling.normalize(model_input(s.x_now, s.u_now, s.refs));
    const Eigen::VectorXd target = net.output_scaling.normalize(s.x_next);
    sum += (forward(net, in) - target).squaredNorm();
  }
  return sum / (static_cast<double>(indices.size()) * kAdpStateSize);
}

}  // namespace

SysIdFit train_sysid(Mlp net, const SysIdDataset& data, const SysIdTrainOptions& options) {
  check_model_net(net);
  if (data.samples.empty()) throw TrainingError("sysid: empty dataset");
  if (options.epochs < 0) throw InvalidParameter("sysid: epochs must be >= 0");
  if (!(options.learning_rate > 0.0)) throw InvalidParameter("sysid: learning rate must be > 0");

  SysIdFit fit;
  split_indices(data.samples.size(), options.holdout_fraction, options.shuffle_seed,
                fit.train_indices, fit.holdout_indices);
  if (fit.train_indices.empty()) throw TrainingError("sysid: no training samples after split");

  // Pre-normalize once; the scalings do not change during training.
  std::vector<Eigen::VectorXd> inputs(data.samples.size());
  std::vector<Eigen::VectorXd> targets(data.samples.size());
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const auto& s = data.samples[i];
    inputs[i] = net.input_scaling.normalize(model_input(s.x_now, s.u_now, s.refs));
    targets[i] = net.output_scaling.normalize(s.x_next);
  }

  const double lr0 = options.learning_rate;
  const double lr1 = options.learning_rate_final > 0.0 ? options.learning_rate_final : lr0;
  Rng rng(options.shuffle_seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order = fit.train_indices;

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const double frac = options.epochs > 1 ? static_cast<double>(epoch) / (options.epochs - 1) : 0.0;
    const double lr = lr0 * std::pow(lr1 / lr0, frac);
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j =
          static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t idx : order) {
      const Eigen::VectorXd err = forward(net, inputs[idx]) - targets[idx];
      apply_sgd(net, backward(net, inputs[idx], err), lr);
    }
    const double train_mse = mean_squared_error(net, data, fit.train_indices);
    if (!std::isfinite(train_mse)) {
      throw TrainingError("sysid: loss diverged in epoch " + std::to_string(epoch));
    }
    fit.history.train.push_back(train_mse);
    fit.history.holdout.push_back(mean_squared_error(net, data, fit.holdout_indices));
  }
  fit.net = std::move(net);
  return fit;
}

AdpVector normalized_rmse(const Mlp& net, const SysIdDataset& data,
                          std::span<const std::size_t> indices) {
  check_model_net(net);
  AdpVector sq = AdpVector::Zero();
  for (std::size_t i : indices) {
    const auto& s = data.samples[i];
    const Eigen::VectorXd in = net.input_scaling.normalize(model_input(s.x_now, s.u_now, s.refs));
    const Eigen::VectorXd err = forward(net, in) - net.output_scaling.normalize(s.x_next);
    sq += err.cwiseAbs2();
  }
  if (!indices.empty()) sq /= static_cast<double>(indices.size());
  return sq.cwiseSqrt();
}

AdpState predict_next_state(const Mlp& net, const AdpState& x, double u, References refs) {
  check_model_net(net);
  return AdpState::from_vector(evaluate(net, model_input(x.vector(), u, refs)));
}

ModelJacobians model_jacobians(const Mlp& net, const AdpState& x, double u, References refs) {
  check_model_net(net);
  const Eigen::MatrixXd jac = evaluate_jacobian(net, model_input(x.vector(), u, refs));
  return {jac.leftCols(kAdpStateSize), jac.col(kAdpStateSize)};
}

References implied_references(const AdpState& x) { return {x.p + x.e_p, x.q + x.e_q}; }

ModelJacobians state_jacobians(const Mlp& net, const AdpState& x, double u) {
  check_model_net(net);
  const Eigen::MatrixXd jac = evaluate_jacobian(net, model_input(x.vector(), u, implied_references(x)));
  ModelJacobians out{jac.leftCols(kAdpStateSize), jac.col(kAdpStateSize)};
  const Eigen::VectorXd d_pset = jac.col(kAdpStateSize + 1);
  const Eigen::VectorXd d_qset = jac.col(kAdpStateSize + 2);
  out.d_state.col(kP) += d_pset;
  out.d_state.col(kEp) += d_pset;
  out.d_state.col(kQ) += d_qset;
  out.d_state.col(kEq) += d_qset;
  return out;
}

}  // namespace vsg
