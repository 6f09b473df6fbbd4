#pragma once

// Small fully connected feedforward networks with analytic weight gradients
// and input Jacobians. Networks operate on normalized vectors; each network
// also carries the affine scaling that maps its physical inputs/outputs to
// and from that normalized space.

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vsg {

enum class Activation { kIdentity, kTanh };

std::string_view activation_name(Activation a);
/// Throws ShapeError for unknown names.
Activation parse_activation(std::string_view name);

/// x_normalized = (x - offset) / scale, elementwise.
struct AffineScaling {
  Eigen::VectorXd offset;
  Eigen::VectorXd scale;

  static AffineScaling identity(Eigen::Index n);
  Eigen::VectorXd normalize(const Eigen::VectorXd& x) const;
  Eigen::VectorXd denormalize(const Eigen::VectorXd& z) const;
};

/// weights[k] is fan_in x fan_out, so layer k computes
/// a_{k+1} = act(weights[k]^T a_k + biases[k]).
struct Mlp {
  std::vector<int> layer_sizes;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Activation hidden_activation = Activation::kTanh;
  Activation output_activation = Activation::kIdentity;
  AffineScaling input_scaling;
  AffineScaling output_scaling;

  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  std::size_t num_layers() const { return weights.size(); }

  /// Throws ShapeError if any matrix, vector or scaling disagrees with
  /// layer_sizes.
  void check_shapes() const;
};

struct GradientBundle {
  std::vector<Eigen::MatrixXd> weight_grads;
  std::vector<Eigen::VectorXd> bias_grads;

  static GradientBundle zeros_like(const Mlp& net);
  GradientBundle& operator+=(const GradientBundle& other);
  GradientBundle& operator*=(double s);
};

/// Weights ~ U(-g/sqrt(fan_in), g/sqrt(fan_in)) with g = kInitGain, biases 0.
inline constexpr double kInitGain = 1.0;

Mlp init_mlp(std::span<const int> layer_sizes, Activation hidden, Activation output,
             std::uint64_t seed);

// Normalized-space operations.
Eigen::VectorXd forward(const Mlp& net, const Eigen::VectorXd& x);
GradientBundle backward(const Mlp& net, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& dloss_doutput);
/// outputs x inputs.
Eigen::MatrixXd input_jacobian(const Mlp& net, const Eigen::VectorXd& x);

/// Returns net with w <- w - lr * grad applied to every weight and bias.
Mlp sgd_update(const Mlp& net, const GradientBundle& grads, double learning_rate);
/// In-place form of sgd_update. Shapes are checked before anything changes.
void apply_sgd(Mlp& net, const GradientBundle& grads, double learning_rate);

// Physical-unit wrappers: scale inputs, run the network, unscale outputs.
Eigen::VectorXd evaluate(const Mlp& net, const Eigen::VectorXd& x_physical);
/// d output_physical / d input_physical.
Eigen::MatrixXd evaluate_jacobian(const Mlp& net, const Eigen::VectorXd& x_physical);
/// Weight gradients of a loss whose derivative w.r.t. the physical output is
/// dloss_doutput_physical.
GradientBundle backward_physical(const Mlp& net, const Eigen::VectorXd& x_physical,
                                 const Eigen::VectorXd& dloss_doutput_physical);

// Text checkpoints:
//   MLPCKPT 1
//   <layer sizes>
//   <hidden activation> <output activation>
//   one line per weight matrix (row-major) followed by its bias vector
//   input offset, input scale, output offset, output scale (one line each)
void save_mlp(const Mlp& net, std::ostream& out);
Mlp load_mlp(std::istream& in);
void save_mlp_file(const Mlp& net, const std::string& path);
Mlp load_mlp_file(const std::string& path);

}  // namespace vsg
