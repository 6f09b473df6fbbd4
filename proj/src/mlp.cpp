#include "vsg/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "vsg/errors.hpp"
#include "vsg/random.hpp"

namespace vsg {

namespace {

double activate(Activation a, double z) { return a == Activation::kTanh ? std::tanh(z) : z; }

// Derivative expressed through the activation value.
double activate_slope(Activation a, double y) { return a == Activation::kTanh ? 1.0 - y * y : 1.0; }

Activation layer_activation(const Mlp& net, std::size_t k) {
  return k + 1 == net.num_layers() ? net.output_activation : net.hidden_activation;
}

void check_input(const Mlp& net, const Eigen::VectorXd& x) {
  if (x.size() != net.input_size()) {
    throw ShapeError("mlp: input has " + std::to_string(x.size()) + " entries, expected " +
                     std::to_string(net.input_size()));
  }
}

void check_output(const Mlp& net, const Eigen::VectorXd& y) {
  if (y.size() != net.output_size()) {
    throw ShapeError("mlp: output gradient has " + std::to_string(y.size()) +
                     " entries, expected " + std::to_string(net.output_size()));
  }
}

void check_congruent(const Mlp& net, const GradientBundle& g) {
  if (g.weight_grads.size() != net.num_layers() || g.bias_grads.size() != net.num_layers()) {
    throw ShapeError("mlp: gradient bundle layer count mismatch");
  }
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    if (g.weight_grads[k].rows() != net.weights[k].rows() ||
        g.weight_grads[k].cols() != net.weights[k].cols() ||
        g.bias_grads[k].size() != net.biases[k].size()) {
      throw ShapeError("mlp: gradient bundle shape mismatch at layer " + std::to_string(k));
    }
  }
}

// Activations a_0 = x, ..., a_L = output.
std::vector<Eigen::VectorXd> forward_all(const Mlp& net, const Eigen::VectorXd& x) {
  std::vector<Eigen::VectorXd> acts;
  acts.reserve(net.num_layers() + 1);
  acts.push_back(x);
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    Eigen::VectorXd z = net.weights[k].transpose() * acts.back() + net.biases[k];
    const Activation a = layer_activation(net, k);
    acts.push_back(z.unaryExpr([a](double v) { return activate(a, v); }));
  }
  return acts;
}

void write_row(std::ostream& out, const double* data, Eigen::Index n) {
  char buf[40];
  for (Eigen::Index i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", data[i]);
    if (i) out << ' ';
    out << buf;
  }
  out << '\n';
}

std::vector<double> read_row(std::istream& in, Eigen::Index expected, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw ShapeError(std::string("checkpoint: missing ") + what);
  std::istringstream ss(line);
  std::vector<double> values;
  double v = 0.0;
  while (ss >> v) values.push_back(v);
  if (static_cast<Eigen::Index>(values.size()) != expected) {
    throw ShapeError(std::string("checkpoint: ") + what + " has " +
                     std::to_string(values.size()) + " values, expected " +
                     std::to_string(expected));
  }
  return values;
}

}  // namespace

std::string_view activation_name(Activation a) {
  return a == Activation::kTanh ? "tanh" : "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  throw ShapeError("mlp: unknown activation '" + std::string(name) + "'");
}

AffineScaling AffineScaling::identity(Eigen::Index n) {
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n)};
}

Eigen::VectorXd AffineScaling::normalize(const Eigen::VectorXd& x) const {
  return (x - offset).cwiseQuotient(scale);
}

Eigen::VectorXd AffineScaling::denormalize(const Eigen::VectorXd& z) const {
  return offset + z.cwiseProduct(scale);
}

void Mlp::check_shapes() const {
  if (layer_sizes.size() < 2) throw ShapeError("mlp: need at least two layers");
  for (int s : layer_sizes) {
    if (s < 1) throw ShapeError("mlp: layer sizes must be >= 1");
  }
  if (weights.size() != layer_sizes.size() - 1 || biases.size() != weights.size()) {
    throw ShapeError("mlp: weight/bias count does not match layer sizes");
  }
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k].rows() != layer_sizes[k] || weights[k].cols() != layer_sizes[k + 1] ||
        biases[k].size() != layer_sizes[k + 1]) {
      throw ShapeError("mlp: layer " + std::to_string(k) + " has wrong dimensions");
    }
  }
  if (input_scaling.offset.size() != input_size() || input_scaling.scale.size() != input_size() ||
      output_scaling.offset.size() != output_size() ||
      output_scaling.scale.size() != output_size()) {
    throw ShapeError("mlp: scaling dimensions do not match the network");
  }
}

GradientBundle GradientBundle::zeros_like(const Mlp& net) {
  GradientBundle g;
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    g.weight_grads.push_back(Eigen::MatrixXd::Zero(net.weights[k].rows(), net.weights[k].cols()));
    g.bias_grads.push_back(Eigen::VectorXd::Zero(net.biases[k].size()));
  }
  return g;
}

GradientBundle& GradientBundle::operator+=(const GradientBundle& other) {
  if (other.weight_grads.size() != weight_grads.size()) {
    throw ShapeError("mlp: adding incongruent gradient bundles");
  }
  for (std::size_t k = 0; k < weight_grads.size(); ++k) {
    weight_grads[k] += other.weight_grads[k];
    bias_grads[k] += other.bias_grads[k];
  }
  return *this;
}

GradientBundle& GradientBundle::operator*=(double s) {
  for (std::size_t k = 0; k < weight_grads.size(); ++k) {
    weight_grads[k] *= s;
    bias_grads[k] *= s;
  }
  return *this;
}

Mlp init_mlp(std::span<const int> layer_sizes, Activation hidden, Activation output,
             std::uint64_t seed) {
  Mlp net;
  net.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
  if (net.layer_sizes.size() < 2) throw ShapeError("mlp: need at least two layers");
  for (int s : net.layer_sizes) {
    if (s < 1) throw ShapeError("mlp: layer sizes must be >= 1");
  }
  net.hidden_activation = hidden;
  net.output_activation = output;
  Rng rng(seed);
  for (std::size_t k = 0; k + 1 < net.layer_sizes.size(); ++k) {
    const int fan_in = net.layer_sizes[k];
    const int fan_out = net.layer_sizes[k + 1];
    const double bound = kInitGain / std::sqrt(static_cast<double>(fan_in));
    Eigen::MatrixXd w(fan_in, fan_out);
    for (int i = 0; i < fan_in; ++i) {
      for (int j = 0; j < fan_out; ++j) w(i, j) = rng.uniform(-bound, bound);
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  net.input_scaling = AffineScaling::identity(net.input_size());
  net.output_scaling = AffineScaling::identity(net.output_size());
  return net;
}

Eigen::VectorXd forward(const Mlp& net, const Eigen::VectorXd& x) {
  check_input(net, x);
  Eigen::VectorXd a = x;
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    const Activation act = layer_activation(net, k);
    a = (net.weights[k].transpose() * a + net.biases[k])
            .unaryExpr([act](double v) { return activate(act, v); });
  }
  return a;
}

GradientBundle backward(const Mlp& net, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& dloss_doutput) {
  check_input(net, x);
  check_output(net, dloss_doutput);
  const auto acts = forward_all(net, x);
  GradientBundle g;
  g.weight_grads.resize(net.num_layers());
  g.bias_grads.resize(net.num_layers());
  Eigen::VectorXd upstream = dloss_doutput;
  for (std::size_t k = net.num_layers(); k-- > 0;) {
    const Activation act = layer_activation(net, k);
    const Eigen::VectorXd& y = acts[k + 1];
    Eigen::VectorXd dz = upstream;
    for (Eigen::Index i = 0; i < dz.size(); ++i) dz(i) *= activate_slope(act, y(i));
    g.weight_grads[k] = acts[k] * dz.transpose();
    g.bias_grads[k] = dz;
    if (k > 0) upstream = net.weights[k] * dz;
  }
  return g;
}

Eigen::MatrixXd input_jacobian(const Mlp& net, const Eigen::VectorXd& x) {
  check_input(net, x);
  const auto acts = forward_all(net, x);
  // Forward-mode accumulation: J_k = d a_k / d x.
  Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(net.input_size(), net.input_size());
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    const Activation act = layer_activation(net, k);
    Eigen::MatrixXd next = net.weights[k].transpose() * jac;
    const Eigen::VectorXd& y = acts[k + 1];
    for (Eigen::Index i = 0; i < next.rows(); ++i) next.row(i) *= activate_slope(act, y(i));
    jac = std::move(next);
  }
  return jac;
}

void apply_sgd(Mlp& net, const GradientBundle& grads, double learning_rate) {
  if (!(learning_rate > 0.0)) throw InvalidParameter("sgd: learning rate must be > 0");
  check_congruent(net, grads);
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    net.weights[k] -= learning_rate * grads.weight_grads[k];
    net.biases[k] -= learning_rate * grads.bias_grads[k];
  }
}

Mlp sgd_update(const Mlp& net, const GradientBundle& grads, double learning_rate) {
  Mlp out = net;
  apply_sgd(out, grads, learning_rate);
  return out;
}

Eigen::VectorXd evaluate(const Mlp& net, const Eigen::VectorXd& x_physical) {
  check_input(net, x_physical);
  return net.output_scaling.denormalize(forward(net, net.input_scaling.normalize(x_physical)));
}

Eigen::MatrixXd evaluate_jacobian(const Mlp& net, const Eigen::VectorXd& x_physical) {
  check_input(net, x_physical);
  Eigen::MatrixXd jac = input_jacobian(net, net.input_scaling.normalize(x_physical));
  return net.output_scaling.scale.asDiagonal() * jac *
         net.input_scaling.scale.cwiseInverse().asDiagonal();
}

GradientBundle backward_physical(const Mlp& net, const Eigen::VectorXd& x_physical,
                                 const Eigen::VectorXd& dloss_doutput_physical) {
  check_input(net, x_physical);
  check_output(net, dloss_doutput_physical);
  return backward(net, net.input_scaling.normalize(x_physical),
                  dloss_doutput_physical.cwiseProduct(net.output_scaling.scale));
}

void save_mlp(const Mlp& net, std::ostream& out) {
  net.check_shapes();
  out << "MLPCKPT 1\n";
  for (std::size_t i = 0; i < net.layer_sizes.size(); ++i) {
    if (i) out << ' ';
    out << net.layer_sizes[i];
  }
  out << '\n'
      << activation_name(net.hidden_activation) << ' ' << activation_name(net.output_activation)
      << '\n';
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w = net.weights[k];
    write_row(out, w.data(), w.size());
    write_row(out, net.biases[k].data(), net.biases[k].size());
  }
  for (const auto* v : {&net.input_scaling.offset, &net.input_scaling.scale,
                        &net.output_scaling.offset, &net.output_scaling.scale}) {
    write_row(out, v->data(), v->size());
  }
}

Mlp load_mlp(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "MLPCKPT 1") {
    throw ShapeError("checkpoint: bad header (expected 'MLPCKPT 1')");
  }
  Mlp net;
  if (!std::getline(in, line)) throw ShapeError("checkpoint: missing layer sizes");
  {
    std::istringstream ss(line);
    int s = 0;
    while (ss >> s) net.layer_sizes.push_back(s);
  }
  if (net.layer_sizes.size() < 2) throw ShapeError("checkpoint: need at least two layers");
  for (int s : net.layer_sizes) {
    if (s < 1) throw ShapeError("checkpoint: layer sizes must be >= 1");
  }
  if (!std::getline(in, line)) throw ShapeError("checkpoint: missing activations");
  {
    std::istringstream ss(line);
    std::string hidden, output;
    if (!(ss >> hidden >> output)) throw ShapeError("checkpoint: malformed activations line");
    net.hidden_activation = parse_activation(hidden);
    net.output_activation = parse_activation(output);
  }
  for (std::size_t k = 0; k + 1 < net.layer_sizes.size(); ++k) {
    const int rows = net.layer_sizes[k];
    const int cols = net.layer_sizes[k + 1];
    const auto w = read_row(in, static_cast<Eigen::Index>(rows) * cols, "weight matrix");
    net.weights.push_back(
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            w.data(), rows, cols));
    const auto b = read_row(in, cols, "bias vector");
    net.biases.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), cols));
  }
  auto read_vec = [&in](Eigen::Index n, const char* what) {
    const auto v = read_row(in, n, what);
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), n));
  };
  net.input_scaling.offset = read_vec(net.input_size(), "input offset");
  net.input_scaling.scale = read_vec(net.input_size(), "input scale");
  net.output_scaling.offset = read_vec(net.output_size(), "output offset");
  net.output_scaling.scale = read_vec(net.output_size(), "output scale");
  net.check_shapes();
  return net;
}

void save_mlp_file(const Mlp& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  save_mlp(net, out);
}

Mlp load_mlp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path);
  return load_mlp(in);
}

}  // namespace vsg
