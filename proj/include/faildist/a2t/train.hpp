#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "faildist/a2t/a2t.hpp"
#include "faildist/core/errors.hpp"
#include "faildist/core/model.hpp"
#include "faildist/core/parallel.hpp"
#include "faildist/core/rng.hpp"
#include "faildist/policy/policy.hpp"

namespace faildist::a2t {

struct TrainConfig {
  std::size_t n_iter = 1000;
  std::size_t n_samp = 1000;  // state visits per iteration (at least)
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  /// Rollouts are generated in fixed-size parallel batches so the visited
  /// states do not depend on the thread count.
  std::size_t rollouts_per_batch = 16;
  policy::PolicyOptions policy;

  void validate() const {
    if (n_iter == 0 || n_samp == 0 || rollouts_per_batch == 0) {
      throw ConfigError("train: n_iter, n_samp and batch size must be positive");
    }
    if (!(learning_rate >= 0.0)) throw ConfigError("train: learning rate must be nonnegative");
  }
};

struct IterationStats {
  std::size_t iteration = 0;
  double loss = 0.0;
  double failure_fraction = 0.0;
  double mean_abs_grad = 0.0;
  std::size_t rollouts = 0;
  std::size_t samples = 0;
};

inline constexpr std::uint64_t kTrainStream = 0x7472;

/// Monte Carlo policy evaluation with function approximation: every
/// iteration rolls out the failure policy built from the current network,
/// regresses the network onto the likelihood-ratio returns of all visited
/// states and takes one gradient step.
///
/// `Encoder` provides num_features(), num_solutions() and
/// encode(state, x, u); `initial_state(rng)` draws a start state.
template <DisturbanceModel M, class Encoder, class Init>
std::vector<IterationStats> mc_policy_eval(const M& model, A2TNetwork& net, const Encoder& enc,
                                           const Init& initial_state, const TrainConfig& cfg,
                                           const std::function<void(const IterationStats&)>& on_iteration = {}) {
  cfg.validate();
  using State = typename M::State;
  std::vector<IterationStats> history;
  history.reserve(cfg.n_iter);

  for (std::size_t it = 0; it < cfg.n_iter; ++it) {
    const EncodedValueFunction<Encoder> vf(net, enc);
    std::vector<Trajectory<State>> trajs;
    std::size_t visits = 0;
    while (visits < cfg.n_samp) {
      const std::size_t first = trajs.size();
      trajs.resize(first + cfg.rollouts_per_batch);
      parallel_for(cfg.rollouts_per_batch, cfg.threads, [&](std::size_t k) {
        Rng rng = make_stream(cfg.seed, kTrainStream, it, first + k);
        const State s0 = initial_state(rng);
        trajs[first + k] = policy::rollout(model, s0, vf, rng, cfg.policy);
      });
      for (std::size_t k = first; k < trajs.size(); ++k) visits += trajs[k].num_steps();
    }

    std::vector<Sample> batch;
    batch.reserve(visits);
    std::size_t failures = 0;
    for (const auto& t : trajs) {
      failures += t.ended_in_failure ? 1 : 0;
      const auto g = policy::compute_returns(t);
      for (std::size_t j = 0; j < g.size(); ++j) {
        Sample s;
        enc.encode(t.states[j], s.x, s.u);
        s.target = g[j];
        batch.push_back(std::move(s));
      }
    }

    const auto lg = loss_and_gradient(net, batch);
    double abs_sum = 0.0;
    for (double g : lg.grad) abs_sum += std::abs(g);
    auto params = net.params();
    if (cfg.learning_rate != 0.0) {
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= cfg.learning_rate * lg.grad[i];
    }

    IterationStats st;
    st.iteration = it;
    st.loss = lg.loss;
    st.failure_fraction = static_cast<double>(failures) / static_cast<double>(trajs.size());
    st.mean_abs_grad = abs_sum / static_cast<double>(lg.grad.size());
    st.rollouts = trajs.size();
    st.samples = batch.size();
    history.push_back(st);
    if (on_iteration) on_iteration(st);
  }
  return history;
}

}  // namespace faildist::a2t
