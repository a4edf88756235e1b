#include <gtest/gtest.h>

#include <cmath>

#include "faildist/baselines/baselines.hpp"
#include "faildist/core/errors.hpp"
#include "faildist/sim/simulator.hpp"
#include "support/chain_mdp.hpp"

using namespace faildist;
using namespace faildist::baselines;
using faildist::testing::ChainMdp;
using faildist::testing::ChainState;

namespace {

// Seven disturbances; only index 4 moves the counter and it is rare.
struct RareStepState {
  int k = 0;
  int t = 0;
  bool operator==(const RareStepState&) const = default;
};

struct RareStepMdp {
  using State = RareStepState;
  static constexpr double kRare = 1e-3;
  std::size_t num_disturbances(const State&) const { return 7; }
  double disturbance_logprob(std::size_t x, const State&) const {
    return std::log(x == 4 ? kRare : (1.0 - kRare) / 6.0);
  }
  State step(const State& s, std::size_t x) const { return {s.k + (x == 4 ? 1 : 0), s.t + 1}; }
  bool is_failure(const State& s) const { return s.k >= 2; }
  bool is_terminal(const State& s) const { return s.k >= 2 || s.t >= 10; }
  double failure_distance(const State& s) const { return 2.0 - s.k; }
};

const auto chain_start = [](Rng&) { return ChainState{2, 0}; };

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
};

Estimate is_estimate(const std::vector<Trajectory<ChainState>>& trajs) {
  double sum = 0.0, sq = 0.0;
  for (const auto& t : trajs) {
    const double w = t.ended_in_failure ? std::exp(t.log_likelihood_ratio()) : 0.0;
    sum += w;
    sq += w * w;
  }
  const double n = static_cast<double>(trajs.size());
  const double m = sum / n;
  return {m, std::sqrt((sq / n - m * m) / n)};
}

}  // namespace

TEST(MonteCarlo, SamplerIsTheModel) {
  const ChainMdp m;
  for (const auto& t : mc_rollouts(m, 200, chain_start, Streams{1})) {
    EXPECT_EQ(t.logp_model, t.logp_sampler);
    EXPECT_EQ(t.log_likelihood_ratio(), 0.0);
  }
}

TEST(MonteCarlo, FailureFrequencyMatchesEnumeration) {
  const ChainMdp m;
  const auto trajs = mc_rollouts(m, 50000, chain_start, Streams{2});
  const auto est = is_estimate(trajs);
  EXPECT_LT(std::abs(est.mean - faildist::testing::exact_value(m, {2, 0})), 3.0 * est.se);
}

TEST(MonteCarlo, ThreadCountDoesNotChangeRollouts) {
  const sim::Simulator s(sim::default_scenario("two_car"));
  const auto init = [&](Rng& r) { return s.initial_scene(r); };
  EXPECT_EQ(mc_rollouts(s, 40, init, Streams{3, 4, 5}, 1), mc_rollouts(s, 40, init, Streams{3, 4, 5}, 3));
}

TEST(UniformIs, SamplerLogProbabilityIsUniform) {
  const sim::Simulator two(sim::default_scenario("two_car"));
  const sim::Simulator five(sim::default_scenario("five_car"));
  for (const auto* s : {&two, &five}) {
    const double expected = -std::log(static_cast<double>(7 * s->config().adversaries.size()));
    const auto trajs = uniform_is_rollouts(*s, 20, [&](Rng& r) { return s->initial_scene(r); }, Streams{6});
    for (const auto& t : trajs) {
      for (double lq : t.logp_sampler) EXPECT_NEAR(lq, expected, 1e-12);
    }
  }
}

TEST(UniformIs, UnbiasedOnChain) {
  const ChainMdp m;
  const auto est = is_estimate(uniform_is_rollouts(m, 50000, chain_start, Streams{7}));
  EXPECT_LT(std::abs(est.mean - faildist::testing::exact_value(m, {2, 0})), 3.0 * est.se);
}

TEST(Categorical, FloorMixing) {
  const auto p = CategoricalProposal::from_weights({0.0, 3.0, 1.0}, 0.01);
  EXPECT_NEAR(p.probs[0], 0.01, 1e-15);
  EXPECT_NEAR(p.probs[1], 0.97 * 0.75 + 0.01, 1e-15);
  EXPECT_NEAR(p.probs[2], 0.97 * 0.25 + 0.01, 1e-15);
  EXPECT_THROW(CategoricalProposal::from_weights({}, 0.01), ContractViolation);
  EXPECT_THROW(CategoricalProposal::from_weights({0.0, 0.0}), ContractViolation);
  EXPECT_THROW(CategoricalProposal::from_weights({1.0, -1.0}), ContractViolation);
  EXPECT_THROW(CategoricalProposal::from_weights({1.0, 1.0}, 0.5), ContractViolation);
}

TEST(Cem, ConcentratesOnTheRareDisturbance) {
  const RareStepMdp m;
  CemOptions opt;
  opt.n_per_iter = 1000;
  opt.n_iters = 10;
  opt.seed = 8;
  const auto res = cem_optimize(m, [](Rng&) { return RareStepState{}; }, opt);
  EXPECT_FALSE(res.no_failures);
  EXPECT_GT(res.proposal.probs[4], 0.05);
  EXPECT_GT(res.history.back().failures, res.history.front().failures);
}

TEST(Cem, ProposalStaysFlooredAndNormalized) {
  const RareStepMdp m;
  CemOptions opt;
  opt.n_per_iter = 200;
  opt.n_iters = 5;
  opt.p_floor = 1e-4;
  const auto res = cem_optimize(m, [](Rng&) { return RareStepState{}; }, opt);
  double total = 0.0;
  for (double p : res.proposal.probs) {
    EXPECT_GE(p, opt.p_floor);
    total += p;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  ASSERT_EQ(res.history.size(), 5u);
  for (const auto& h : res.history) EXPECT_GE(h.elites, 20u);
}

TEST(Cem, FullSmoothingKeepsTheInitialProposal) {
  const ChainMdp m;
  CemOptions opt;
  opt.smoothing = 1.0;
  opt.n_iters = 3;
  const auto start = CategoricalProposal::from_weights(policy::model_distribution(m, ChainState{2, 0}), opt.p_floor);
  const auto res = cem_optimize(m, chain_start, opt);
  // Only the floor mixing moves it: p <- (1 - K f) p + f once per iteration.
  auto expected = start.probs;
  for (int it = 0; it < 3; ++it) {
    for (double& p : expected) p = (1.0 - 3.0 * opt.p_floor) * p + opt.p_floor;
  }
  for (std::size_t x = 0; x < 3; ++x) EXPECT_NEAR(res.proposal.probs[x], expected[x], 1e-15);
  opt.n_iters = 0;
  EXPECT_EQ(cem_optimize(m, chain_start, opt).proposal.probs, start.probs);
}

TEST(Cem, RejectsBadOptions) {
  const ChainMdp m;
  for (double f : {0.0, 1.0, -0.1, 1.5}) {
    CemOptions opt;
    opt.elite_fraction = f;
    EXPECT_THROW(cem_optimize(m, chain_start, opt), ContractViolation);
  }
  CemOptions opt;
  opt.smoothing = 1.1;
  EXPECT_THROW(cem_optimize(m, chain_start, opt), ContractViolation);
}

TEST(Cem, IsEstimateAgreesWithEnumeration) {
  const ChainMdp m;
  CemOptions opt;
  opt.seed = 9;
  const auto res = cem_optimize(m, chain_start, opt);
  const auto est = is_estimate(run_rollouts(m, 0, 50000, chain_start, res.proposal, Streams{10}));
  EXPECT_LT(std::abs(est.mean - faildist::testing::exact_value(m, {2, 0})), 3.0 * est.se);
}

TEST(Cem, MinFailureDistance) {
  const RareStepMdp m;
  Trajectory<RareStepState> t;
  t.states = {{0, 0}, {1, 1}, {1, 2}};
  EXPECT_EQ(min_failure_distance(m, t), 1.0);
  t.ended_in_failure = true;
  EXPECT_EQ(min_failure_distance(m, t), 0.0);
}
