#include "vsg/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "vsg/random.hpp"
#include "vsg/sysid.hpp"

namespace vsg {

namespace {

constexpr double kStep = 1e-6;

Eigen::VectorXd random_vector(Rng& rng, Eigen::Index n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

}  // namespace

double gradcheck_relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

GradcheckReport check_mlp_gradients(int n_nets, std::uint64_t seed) {
  Rng rng(seed);
  GradcheckReport rep;
  for (int n = 0; n < n_nets; ++n) {
    const int layers = static_cast<int>(rng.uniform_int(1, 3));
    std::vector<int> sizes;
    for (int k = 0; k <= layers; ++k) sizes.push_back(static_cast<int>(rng.uniform_int(1, 8)));
    const Activation hidden = rng.uniform() < 0.5 ? Activation::kTanh : Activation::kIdentity;
    const Activation output = rng.uniform() < 0.5 ? Activation::kTanh : Activation::kIdentity;
    Mlp net = init_mlp(sizes, hidden, output, rng.next());
    for (auto& b : net.biases) b = random_vector(rng, b.size(), -0.5, 0.5);
    const Eigen::VectorXd x = random_vector(rng, sizes.front(), -1.0, 1.0);
    const Eigen::VectorXd c = random_vector(rng, sizes.back(), -1.0, 1.0);
    const auto loss = [&c](const Mlp& m, const Eigen::VectorXd& in) { return c.dot(forward(m, in)); };

    const GradientBundle g = backward(net, x, c);
    for (std::size_t k = 0; k < net.num_layers(); ++k) {
      for (Eigen::Index i = 0; i < net.weights[k].size(); ++i) {
        Mlp plus = net, minus = net;
        plus.weights[k].data()[i] += kStep;
        minus.weights[k].data()[i] -= kStep;
        const double fd = (loss(plus, x) - loss(minus, x)) / (2.0 * kStep);
        rep.max_weight_error = std::max(
            rep.max_weight_error, gradcheck_relative_error(g.weight_grads[k].data()[i], fd));
      }
      for (Eigen::Index i = 0; i < net.biases[k].size(); ++i) {
        Mlp plus = net, minus = net;
        plus.biases[k](i) += kStep;
        minus.biases[k](i) -= kStep;
        const double fd = (loss(plus, x) - loss(minus, x)) / (2.0 * kStep);
        rep.max_weight_error =
            std::max(rep.max_weight_error, gradcheck_relative_error(g.bias_grads[k](i), fd));
      }
    }
    const Eigen::MatrixXd jac = input_jacobian(net, x);
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      Eigen::VectorXd xp = x, xm = x;
      xp(j) += kStep;
      xm(j) -= kStep;
      const Eigen::VectorXd fd = (forward(net, xp) - forward(net, xm)) / (2.0 * kStep);
      for (Eigen::Index i = 0; i < fd.size(); ++i) {
        rep.max_jacobian_error =
            std::max(rep.max_jacobian_error, gradcheck_relative_error(jac(i, j), fd(i)));
      }
    }
    ++rep.cases;
  }
  return rep;
}

double check_model_jacobians(const AdpScaling& scaling, int n_points, std::uint64_t seed) {
  Rng rng(seed);
  const Mlp net = make_system_network(scaling, rng.next());
  const AffineScaling in = scaling.model_input();
  const AffineScaling out = scaling.model_output();
  double worst = 0.0;
  for (int n = 0; n < n_points; ++n) {
    const Eigen::VectorXd z = random_vector(rng, kModelInputSize, -1.0, 1.0);
    const Eigen::VectorXd phys = in.denormalize(z);
    const AdpState x = AdpState::from_vector(phys.head(kAdpStateSize));
    const double u = phys(kAdpStateSize);
    const References refs{phys(kAdpStateSize + 1), phys(kAdpStateSize + 2)};
    const ModelJacobians jac = model_jacobians(net, x, u, refs);
    for (int j = 0; j <= kAdpStateSize; ++j) {
      const double h = kStep * in.scale(j);
      Eigen::VectorXd xp = x.vector(), xm = x.vector();
      double up = u, um = u;
      if (j < kAdpStateSize) {
        xp(j) += h;
        xm(j) -= h;
      } else {
        up += h;
        um -= h;
      }
      const Eigen::VectorXd fd = (predict_next_state(net, AdpState::from_vector(xp), up, refs).vector() -
                                  predict_next_state(net, AdpState::from_vector(xm), um, refs).vector()) /
                                 (2.0 * h);
      for (int i = 0; i < kAdpStateSize; ++i) {
        const double a = j < kAdpStateSize ? jac.d_state(i, j) : jac.d_control(i, 0);
        const double unit = out.scale(i) / in.scale(j);
        worst = std::max(worst, gradcheck_relative_error(a / unit, fd(i) / unit));
      }
    }
  }
  return worst;
}

}  // namespace vsg
