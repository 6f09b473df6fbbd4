#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "test_support.hpp"
#include "vsg/adp_state.hpp"
#include "vsg/errors.hpp"
#include "vsg/nnpc.hpp"
#include "vsg/pi_controller.hpp"
#include "vsg/sysid.hpp"

using namespace vsg;
using namespace vsg::testing;

TEST(PiStep, ZeroErrorHoldsCommand) {
  const PiOutput out = pi_voltage_step({91.5}, 1000.0, 1000.0, kVPeak, kVPeak, 5.0, 0.2, 1e-3);
  EXPECT_EQ(out.state.q_integral, 91.5);
  EXPECT_EQ(out.e_command, 91.5);
}

TEST(PiStep, HandValue) {
  // integral 90 + (300 / 5) * 1e-3 = 90.06; E = 90.06 - 0.2 * (100 - 95) = 89.06
  const PiOutput out = pi_voltage_step({90.0}, 500.0, 200.0, 100.0, 95.0, 5.0, 0.2, 1e-3);
  EXPECT_DOUBLE_EQ(out.state.q_integral, 90.06);
  EXPECT_DOUBLE_EQ(out.e_command, 89.06);
}

TEST(PiStep, IntegratorIsExactEulerSum) {
  PiState s{0.0};
  const int n = 1000;
  for (int k = 0; k < n; ++k) s = pi_voltage_step(s, 250.0, 0.0, 0.0, 0.0, 5.0, 0.2, 1e-3).state;
  EXPECT_NEAR(s.q_integral, n * 1e-3 * 250.0 / 5.0, 64 * 1e-15 * 50.0);
}

TEST(PiStep, ActiveVariantIntegratesPowerError) {
  const PiOutput out = pi_active_voltage_step({80.0}, 3000.0, 1000.0, 2.0, 1e-3);
  EXPECT_DOUBLE_EQ(out.state.q_integral, 81.0);
  EXPECT_DOUBLE_EQ(out.e_command, 81.0);
}

TEST(PiClosedLoop, ReactivePowerSettlesOnInductiveGrid) {
  const GridParams g = inductive_grid();
  const SwingParams sw = table_swing();
  PlantState x = initial_state(g);
  PiState pi{x.e_peak};
  double e_prev = x.e_peak;
  const double p_set = 3000.0, q_set = 1000.0;
  for (int k = 0; k < 5000; ++k) {
    const PiOutput out = pi_voltage_step(pi, q_set, total_power(x).q, g.v_grid_peak, e_prev, sw.k_i, sw.d_v, 1e-3);
    pi = out.state;
    e_prev = out.e_command;
    x = plant_step(x, out.e_command, p_set, g, sw, 1e-3);
  }
  EXPECT_NEAR(total_power(x).q, q_set, 0.01 * q_set);
  EXPECT_NEAR(total_power(x).p, p_set, 0.01 * p_set);
}

namespace {

UtilityWeights pq() { return {1.0, 1.0, 0.0}; }

/// Next state's errors are (1, 1) * (target - u) and P/Q track accordingly.
StatePredictor echo_model(double target) {
  return [target](const AdpState& x, double u, References refs) {
    AdpState n = x;
    n.e_p = target - u;
    n.e_q = target - u;
    n.p = refs.p_set - n.e_p;
    n.q = refs.q_set - n.e_q;
    return n;
  };
}

AdpState random_state(std::mt19937_64& gen, References& refs) {
  std::uniform_real_distribution<double> pu(500.0, 5000.0), qu(-2500.0, 2500.0), du(-0.3, 0.3);
  refs = {pu(gen), qu(gen)};
  AdpState x;
  x.p = pu(gen);
  x.q = qu(gen);
  x.e_p = refs.p_set - x.p;
  x.e_q = refs.q_set - x.q;
  x.e_f = 0.01 * du(gen);
  x.theta_i = du(gen);
  return x;
}

}  // namespace

TEST(NnpcCandidates, EquallySpacedAndClamped) {
  const NnpcConfig cfg{10, 1.8, 10};
  const auto c = nnpc_candidates(90.0, cfg, 134.7);
  ASSERT_EQ(c.size(), 10u);
  EXPECT_DOUBLE_EQ(c.front(), 88.2);
  EXPECT_DOUBLE_EQ(c.back(), 91.8);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_NEAR(c[i] - c[i - 1], 0.4, 1e-12);
  const auto low = nnpc_candidates(0.5, cfg, 134.7);
  EXPECT_EQ(low.front(), 0.0);
  const auto high = nnpc_candidates(134.0, cfg, 134.7);
  EXPECT_EQ(high.back(), 134.7);
}

TEST(NnpcConfig, Validation) {
  EXPECT_THROW((NnpcConfig{1, 1.0, 1}.validate()), InvalidParameter);
  EXPECT_THROW((NnpcConfig{10, 0.0, 1}.validate()), InvalidParameter);
  EXPECT_THROW((NnpcConfig{10, 1.0, 0}.validate()), InvalidParameter);
  EXPECT_NO_THROW((NnpcConfig{2, 1.0, 1}.validate()));
}

TEST(NnpcControl, PerfectEchoPicksTheReachableCandidate) {
  const NnpcConfig cfg{10, 1.8, 1};
  const auto c = nnpc_candidates(90.0, cfg, 134.7);
  for (double target : {c[0], c[3], c[9]}) {
    const double u = nnpc_control(echo_model(target), AdpState{}, {1000, 0}, 90.0, cfg, pq(), 134.7);
    EXPECT_EQ(u, target);
  }
}

TEST(NnpcControl, TiesGoToTheSmallestMove) {
  const NnpcConfig cfg{10, 1.8, 3};
  const StatePredictor flat = [](const AdpState& x, double, References) { return x; };
  const double u = nnpc_control(flat, AdpState{}, {}, 90.0, cfg, pq(), 134.7);
  const auto c = nnpc_candidates(90.0, cfg, 134.7);
  double best = 1e9;
  for (double v : c) best = std::min(best, std::abs(v - 90.0));
  EXPECT_DOUBLE_EQ(std::abs(u - 90.0), best);
}

TEST(NnpcControl, MatchesExhaustiveRolloutsOnRandomStates) {
  const AdpScaling sc = make_adp_scaling(inductive_grid());
  const Mlp model = make_system_network(sc, 21);
  const NnpcConfig cfg{10, 0.02 * kVPeak, 10};
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> eu(80.0, 100.0);
  for (int n = 0; n < 50; ++n) {
    References refs;
    const AdpState x = random_state(gen, refs);
    const double e_now = eu(gen);
    const double u = nnpc_control(model, x, refs, e_now, cfg, pq(), sc.command_limit);

    const auto cands = nnpc_candidates(e_now, cfg, sc.command_limit);
    ASSERT_NE(std::find(cands.begin(), cands.end(), u), cands.end());
    double best_cost = std::numeric_limits<double>::infinity();
    double best_u = 0.0;
    for (double c : cands) {
      AdpState s = x;
      double cost = 0.0;
      for (int k = 0; k < cfg.horizon; ++k) {
        const Eigen::VectorXd out = evaluate(model, model_input(s.vector(), c, refs));
        s = AdpState::from_vector(out);
        cost += std::sqrt(s.e_p * s.e_p + s.e_q * s.e_q);
      }
      if (cost < best_cost ||
          (cost == best_cost && std::abs(c - e_now) < std::abs(best_u - e_now))) {
        best_cost = cost;
        best_u = c;
      }
    }
    EXPECT_EQ(u, best_u) << n;
  }
}

TEST(NnpcControl, ChoiceInvariantUnderPositiveUtilityScaling) {
  const AdpScaling sc = make_adp_scaling(inductive_grid());
  const Mlp model = make_system_network(sc, 22);
  const NnpcConfig cfg{10, 0.02 * kVPeak, 5};
  std::mt19937_64 gen(6);
  for (int n = 0; n < 20; ++n) {
    References refs;
    const AdpState x = random_state(gen, refs);
    const double a = nnpc_control(model, x, refs, 90.0, cfg, {1, 1, 0}, sc.command_limit);
    // Scaling every weight by 9 multiplies each U by 3.
    const double b = nnpc_control(model, x, refs, 90.0, cfg, {9, 9, 0}, sc.command_limit);
    EXPECT_EQ(a, b);
  }
}

TEST(NnpcControl, RejectsWrongModelShape) {
  const int sizes[] = {6, 4, 6};
  const Mlp wrong = init_mlp(sizes, Activation::kTanh, Activation::kIdentity, 1);
  EXPECT_THROW(nnpc_control(wrong, AdpState{}, {}, 90.0, NnpcConfig{10, 1.8, 2}, pq(), 134.7),
               ShapeError);
}
