#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "test_support.hpp"
#include "vsg/errors.hpp"
#include "vsg/mlp.hpp"

using namespace vsg;
using vsg::testing::rel_err;

namespace {

constexpr double kFdStep = 1e-6;
constexpr double kFdFloor = 1e-4;

struct RandomCase {
  Mlp net;
  Eigen::VectorXd x;
  Eigen::VectorXd c;  // loss = c . output
};

RandomCase random_case(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> depth(1, 3), width(1, 8);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<int> sizes;
  const int layers = depth(gen);
  for (int k = 0; k <= layers; ++k) sizes.push_back(width(gen));
  const Activation hid = gen() % 2 ? Activation::kTanh : Activation::kIdentity;
  const Activation out = gen() % 2 ? Activation::kTanh : Activation::kIdentity;
  RandomCase rc{init_mlp(sizes, hid, out, gen()), Eigen::VectorXd(sizes.front()),
                Eigen::VectorXd(sizes.back())};
  for (auto& b : rc.net.biases) b = b.unaryExpr([&](double) { return 0.5 * unit(gen); });
  rc.x = rc.x.unaryExpr([&](double) { return unit(gen); });
  rc.c = rc.c.unaryExpr([&](double) { return unit(gen); });
  return rc;
}

// Straight-line re-evaluation of the affine chain.
Eigen::VectorXd reference_forward(const Mlp& net, const Eigen::VectorXd& x) {
  std::vector<double> a(x.data(), x.data() + x.size());
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    const bool last = k + 1 == net.weights.size();
    const Activation act = last ? net.output_activation : net.hidden_activation;
    std::vector<double> next(static_cast<std::size_t>(net.weights[k].cols()));
    for (Eigen::Index j = 0; j < net.weights[k].cols(); ++j) {
      double z = net.biases[k](j);
      for (Eigen::Index i = 0; i < net.weights[k].rows(); ++i) z += net.weights[k](i, j) * a[i];
      next[j] = act == Activation::kTanh ? std::tanh(z) : z;
    }
    a = next;
  }
  return Eigen::Map<Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
}

Mlp identity_layer(int n) {
  const int sizes[] = {n, n};
  Mlp net = init_mlp(sizes, Activation::kIdentity, Activation::kIdentity, 1);
  net.weights[0].setIdentity();
  return net;
}

}  // namespace

TEST(MlpInit, SameSeedSameNetwork) {
  const int sizes[] = {6, 8, 8, 1};
  const Mlp a = init_mlp(sizes, Activation::kTanh, Activation::kTanh, 42);
  const Mlp b = init_mlp(sizes, Activation::kTanh, Activation::kTanh, 42);
  const Mlp c = init_mlp(sizes, Activation::kTanh, Activation::kTanh, 43);
  for (std::size_t k = 0; k < a.weights.size(); ++k) {
    EXPECT_EQ(a.weights[k], b.weights[k]);
    EXPECT_EQ(a.biases[k], b.biases[k]);
  }
  EXPECT_NE(a.weights[0], c.weights[0]);
}

TEST(MlpInit, FanInScaledUniformWeights) {
  const int sizes[] = {9, 5, 5, 6};
  const Mlp net = init_mlp(sizes, Activation::kTanh, Activation::kIdentity, 7);
  ASSERT_EQ(net.weights.size(), 3u);
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    EXPECT_EQ(net.weights[k].rows(), sizes[k]);
    EXPECT_EQ(net.weights[k].cols(), sizes[k + 1]);
    EXPECT_LE(net.weights[k].cwiseAbs().maxCoeff(), 1.0 / std::sqrt(sizes[k]));
    EXPECT_TRUE(net.biases[k].isZero());
  }
}

TEST(MlpInit, RejectsBadLayerLists) {
  const int one[] = {3};
  const int zero[] = {3, 0, 1};
  EXPECT_THROW(init_mlp(std::span<const int>(), Activation::kTanh, Activation::kTanh, 1), ShapeError);
  EXPECT_THROW(init_mlp(one, Activation::kTanh, Activation::kTanh, 1), ShapeError);
  EXPECT_THROW(init_mlp(zero, Activation::kTanh, Activation::kTanh, 1), ShapeError);
}

TEST(MlpForward, ZeroNetworkGivesZero) {
  const int sizes[] = {4, 3, 2};
  Mlp net = init_mlp(sizes, Activation::kTanh, Activation::kIdentity, 3);
  for (auto& w : net.weights) w.setZero();
  EXPECT_TRUE(forward(net, Eigen::VectorXd::Constant(4, 0.7)).isZero());
  EXPECT_TRUE(input_jacobian(net, Eigen::VectorXd::Constant(4, 0.7)).isZero());
}

TEST(MlpForward, IdentityLayerEchoesInput) {
  const Mlp net = identity_layer(5);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(5, -1.0, 2.0);
  EXPECT_EQ(forward(net, x), x);
  EXPECT_EQ(input_jacobian(net, x), Eigen::MatrixXd::Identity(5, 5));
}

TEST(MlpForward, MatchesStraightLineEvaluation) {
  std::mt19937_64 gen(11);
  for (int n = 0; n < 50; ++n) {
    const RandomCase rc = random_case(gen);
    const Eigen::VectorXd got = forward(rc.net, rc.x);
    const Eigen::VectorXd want = reference_forward(rc.net, rc.x);
    for (Eigen::Index i = 0; i < got.size(); ++i) EXPECT_LE(rel_err(got(i), want(i), 1e-300), 1e-12);
  }
}

TEST(MlpForward, ShapeMismatchThrows) {
  const Mlp net = identity_layer(3);
  EXPECT_THROW(forward(net, Eigen::VectorXd::Zero(4)), ShapeError);
  EXPECT_THROW(input_jacobian(net, Eigen::VectorXd::Zero(2)), ShapeError);
  EXPECT_THROW(backward(net, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2)), ShapeError);
}

TEST(MlpBackward, ZeroUpstreamGivesZeroGradients) {
  std::mt19937_64 gen(5);
  const RandomCase rc = random_case(gen);
  const GradientBundle g = backward(rc.net, rc.x, Eigen::VectorXd::Zero(rc.net.output_size()));
  for (std::size_t k = 0; k < g.weight_grads.size(); ++k) {
    EXPECT_TRUE(g.weight_grads[k].isZero());
    EXPECT_TRUE(g.bias_grads[k].isZero());
  }
}

TEST(MlpBackward, MatchesCentralDifferencesOnRandomNets) {
  std::mt19937_64 gen(2024);
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const RandomCase rc = random_case(gen);
    const auto loss = [&](const Mlp& m) { return rc.c.dot(forward(m, rc.x)); };
    const GradientBundle g = backward(rc.net, rc.x, rc.c);
    for (std::size_t k = 0; k < rc.net.weights.size(); ++k) {
      for (Eigen::Index i = 0; i < rc.net.weights[k].size(); ++i) {
        Mlp p = rc.net, m = rc.net;
        p.weights[k].data()[i] += kFdStep;
        m.weights[k].data()[i] -= kFdStep;
        const double fd = (loss(p) - loss(m)) / (2 * kFdStep);
        worst = std::max(worst, rel_err(g.weight_grads[k].data()[i], fd, kFdFloor));
      }
      for (Eigen::Index i = 0; i < rc.net.biases[k].size(); ++i) {
        Mlp p = rc.net, m = rc.net;
        p.biases[k](i) += kFdStep;
        m.biases[k](i) -= kFdStep;
        const double fd = (loss(p) - loss(m)) / (2 * kFdStep);
        worst = std::max(worst, rel_err(g.bias_grads[k](i), fd, kFdFloor));
      }
    }
  }
  EXPECT_LE(worst, 1e-5);
}

TEST(MlpBackward, LinearLayerMatchesLeastSquaresGradient) {
  const int sizes[] = {3, 2};
  const Mlp net = init_mlp(sizes, Activation::kIdentity, Activation::kIdentity, 9);
  const Eigen::Vector3d x(0.3, -1.2, 0.5);
  const Eigen::Vector2d target(0.1, 0.4);
  const Eigen::VectorXd resid = forward(net, x) - target;
  const GradientBundle g = backward(net, x, resid);  // loss 0.5 ||Wx + b - t||^2
  EXPECT_TRUE(g.weight_grads[0].isApprox(x * resid.transpose(), 1e-14));
  EXPECT_TRUE(g.bias_grads[0].isApprox(resid, 1e-14));
}

TEST(MlpJacobian, MatchesCentralDifferencesOnRandomNets) {
  std::mt19937_64 gen(77);
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const RandomCase rc = random_case(gen);
    const Eigen::MatrixXd jac = input_jacobian(rc.net, rc.x);
    for (Eigen::Index j = 0; j < rc.x.size(); ++j) {
      Eigen::VectorXd p = rc.x, m = rc.x;
      p(j) += kFdStep;
      m(j) -= kFdStep;
      const Eigen::VectorXd fd = (forward(rc.net, p) - forward(rc.net, m)) / (2 * kFdStep);
      for (Eigen::Index i = 0; i < fd.size(); ++i) worst = std::max(worst, rel_err(jac(i, j), fd(i), kFdFloor));
    }
  }
  EXPECT_LE(worst, 1e-5);
}

TEST(MlpSgd, ZeroStepLeavesNetworkUnchanged) {
  std::mt19937_64 gen(3);
  const RandomCase rc = random_case(gen);
  const Mlp out = sgd_update(rc.net, GradientBundle::zeros_like(rc.net), 0.5);
  for (std::size_t k = 0; k < out.weights.size(); ++k) EXPECT_EQ(out.weights[k], rc.net.weights[k]);
}

TEST(MlpSgd, SequentialUpdatesAddUp) {
  const int sizes[] = {3, 2};
  const Mlp net = init_mlp(sizes, Activation::kIdentity, Activation::kIdentity, 4);
  const GradientBundle g1 = backward(net, Eigen::Vector3d(1, 2, 3), Eigen::Vector2d(0.5, -1));
  const GradientBundle g2 = backward(net, Eigen::Vector3d(-1, 0, 2), Eigen::Vector2d(2, 1));
  const Mlp two = sgd_update(sgd_update(net, g1, 0.1), g2, 0.1);
  GradientBundle sum = g1;
  sum += g2;
  const Mlp one = sgd_update(net, sum, 0.1);
  EXPECT_TRUE(two.weights[0].isApprox(one.weights[0], 1e-14));
  EXPECT_TRUE(two.biases[0].isApprox(one.biases[0], 1e-14));
}

TEST(MlpSgd, DescendsOnConvexLeastSquares) {
  const int sizes[] = {2, 1};
  Mlp net = init_mlp(sizes, Activation::kIdentity, Activation::kIdentity, 8);
  std::vector<std::pair<Eigen::VectorXd, double>> batch;
  for (int i = 0; i < 8; ++i) {
    Eigen::VectorXd x(2);
    x << std::cos(i), std::sin(0.7 * i);
    batch.emplace_back(x, 0.3 * x(0) - 1.1 * x(1) + 0.2);
  }
  const auto loss = [&](const Mlp& m) {
    double l = 0;
    for (const auto& [x, y] : batch) l += 0.5 * std::pow(forward(m, x)(0) - y, 2);
    return l;
  };
  double prev = loss(net);
  for (int it = 0; it < 200; ++it) {
    GradientBundle g = GradientBundle::zeros_like(net);
    for (const auto& [x, y] : batch) {
      g += backward(net, x, Eigen::VectorXd::Constant(1, forward(net, x)(0) - y));
    }
    net = sgd_update(net, g, 0.02);
    const double cur = loss(net);
    EXPECT_LE(cur, prev + 1e-15);
    prev = cur;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(MlpSgd, MismatchedBundleFailsWithoutMutation) {
  const int a[] = {3, 2};
  const int b[] = {3, 3};
  Mlp net = init_mlp(a, Activation::kIdentity, Activation::kIdentity, 1);
  const Mlp before = net;
  const Mlp other = init_mlp(b, Activation::kIdentity, Activation::kIdentity, 1);
  EXPECT_THROW(apply_sgd(net, GradientBundle::zeros_like(other), 0.1), ShapeError);
  EXPECT_EQ(net.weights[0], before.weights[0]);
  EXPECT_THROW(sgd_update(net, GradientBundle::zeros_like(net), 0.0), InvalidParameter);
}

TEST(MlpScaling, PhysicalJacobianAppliesScaleFactors) {
  const int sizes[] = {2, 4, 3};
  Mlp net = init_mlp(sizes, Activation::kTanh, Activation::kIdentity, 21);
  net.input_scaling = {Eigen::Vector2d(1.0, -2.0), Eigen::Vector2d(10.0, 0.1)};
  net.output_scaling = {Eigen::Vector3d(0.0, 5.0, 1.0), Eigen::Vector3d(100.0, 2.0, 0.5)};
  const Eigen::Vector2d x(3.0, -1.95);
  const Eigen::MatrixXd jac = evaluate_jacobian(net, x);
  for (int j = 0; j < 2; ++j) {
    const double h = 1e-6 * net.input_scaling.scale(j);
    Eigen::VectorXd p = x, m = x;
    p(j) += h;
    m(j) -= h;
    const Eigen::VectorXd fd = (evaluate(net, p) - evaluate(net, m)) / (2 * h);
    for (int i = 0; i < 3; ++i) EXPECT_LE(rel_err(jac(i, j), fd(i), 1e-3), 1e-6);
  }
  const Eigen::VectorXd z = Eigen::Vector2d(0.3, -0.8);
  EXPECT_TRUE(net.input_scaling.normalize(net.input_scaling.denormalize(z)).isApprox(z, 1e-12));
}

TEST(MlpCheckpoint, RoundTripsExactly) {
  std::mt19937_64 gen(99);
  RandomCase rc = random_case(gen);
  rc.net.input_scaling.offset.setConstant(0.1);
  rc.net.output_scaling.scale.setConstant(3.0 / 7.0);
  std::stringstream ss;
  save_mlp(rc.net, ss);
  EXPECT_EQ(ss.str().rfind("MLPCKPT 1\n", 0), 0u);
  const Mlp back = load_mlp(ss);
  ASSERT_EQ(back.layer_sizes, rc.net.layer_sizes);
  EXPECT_EQ(back.hidden_activation, rc.net.hidden_activation);
  EXPECT_EQ(back.output_activation, rc.net.output_activation);
  for (std::size_t k = 0; k < back.weights.size(); ++k) {
    EXPECT_EQ(back.weights[k], rc.net.weights[k]);
    EXPECT_EQ(back.biases[k], rc.net.biases[k]);
  }
  EXPECT_EQ(back.input_scaling.offset, rc.net.input_scaling.offset);
  EXPECT_EQ(back.output_scaling.scale, rc.net.output_scaling.scale);
}

TEST(MlpCheckpoint, RejectsMalformedFiles) {
  std::stringstream bad_header("MLPCKPT 2\n2 1\ntanh identity\n");
  EXPECT_THROW(load_mlp(bad_header), ShapeError);
  std::stringstream short_row("MLPCKPT 1\n2 1\ntanh identity\n0.5\n0\n");
  EXPECT_THROW(load_mlp(short_row), ShapeError);
}
