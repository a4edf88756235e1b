#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <vector>

#include "faildist/core/errors.hpp"
#include "faildist/core/model.hpp"
#include "faildist/core/rng.hpp"

namespace faildist::policy {

/// Anything that maps a state to an estimated failure probability in [0, 1].
template <class F, class State>
concept ValueFunction = requires(const F& f, const State& s) {
  { f(s) } -> std::convertible_to<double>;
};

struct PolicyOptions {
  /// Added to the value of every non-terminal successor so an approximate
  /// value function that returns 0 everywhere still yields a usable policy.
  double value_epsilon = 1e-6;
};

/// Nominal model distribution p(.|s).
template <DisturbanceModel M>
std::vector<double> model_distribution(const M& model, const typename M::State& s) {
  std::vector<double> p(model.num_disturbances(s));
  for (std::size_t x = 0; x < p.size(); ++x) p[x] = std::exp(model.disturbance_logprob(x, s));
  return p;
}

/// Failure policy: pi(x|s) proportional to p(x|s) * v(step(s, x)), where
/// failures count 1 and safe terminal states 0. Falls back to p(.|s) when
/// every weight is zero.
template <DisturbanceModel M, ValueFunction<typename M::State> VF>
std::vector<double> policy_distribution(const M& model, const typename M::State& s, const VF& vf,
                                        const PolicyOptions& opt = {}) {
  if (model.is_terminal(s)) throw ContractViolation("policy_distribution: state is terminal");
  auto w = model_distribution(model, s);
  double total = 0.0;
  for (std::size_t x = 0; x < w.size(); ++x) {
    const auto next = model.step(s, x);
    double v = 0.0;
    if (model.is_failure(next)) {
      v = 1.0;
    } else if (!model.is_terminal(next)) {
      v = static_cast<double>(vf(next)) + opt.value_epsilon;
    }
    w[x] *= v;
    total += w[x];
  }
  if (!(total > 0.0)) return model_distribution(model, s);
  for (double& x : w) x /= total;
  return w;
}

/// Runs one episode from s0 drawing each disturbance from proposal(s), a
/// distribution over the model's disturbances. Stops at the first terminal state.
template <DisturbanceModel M, class Proposal>
Trajectory<typename M::State> sample_rollout(const M& model, const typename M::State& s0, Rng& rng,
                                             const Proposal& proposal) {
  Trajectory<typename M::State> traj;
  traj.states.push_back(s0);
  while (!model.is_terminal(traj.states.back())) {
    const auto& s = traj.states.back();
    const std::vector<double> q = proposal(s);
    const std::size_t x = sample_categorical(q, rng);
    const double lp = model.disturbance_logprob(x, s);
    if (!(q[x] > 0.0) || !std::isfinite(lp)) {
      throw ContractViolation("sample_rollout: sampled a disturbance the model cannot produce");
    }
    traj.disturbances.push_back(x);
    traj.logp_model.push_back(lp);
    traj.logp_sampler.push_back(std::log(q[x]));
    auto next = model.step(s, x);
    traj.states.push_back(std::move(next));
  }
  traj.ended_in_failure = model.is_failure(traj.states.back());
  return traj;
}

template <DisturbanceModel M, ValueFunction<typename M::State> VF>
Trajectory<typename M::State> rollout(const M& model, const typename M::State& s0, const VF& vf, Rng& rng,
                                      const PolicyOptions& opt = {}) {
  return sample_rollout(model, s0, rng, [&](const typename M::State& s) {
    return policy_distribution(model, s, vf, opt);
  });
}

/// Likelihood-ratio weighted failure indicator for every non-terminal state:
/// G(s_j) = 1{failure} * exp(sum over t > j of log p(x_t) - log q(x_t)).
template <class State>
std::vector<double> compute_returns(const Trajectory<State>& traj) {
  const std::size_t n = traj.num_steps();
  std::vector<double> g(n, 0.0);
  if (!traj.ended_in_failure) return g;
  double log_ratio = 0.0;
  for (std::size_t j = n; j-- > 0;) {
    log_ratio += traj.logp_model[j] - traj.logp_sampler[j];
    g[j] = std::exp(log_ratio);
  }
  return g;
}

}  // namespace faildist::policy
