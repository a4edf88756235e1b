#pragma once

#include <concepts>
#include <cstddef>
#include <vector>

namespace faildist {

/// A Markov system whose only randomness is a finite set of disturbances,
/// indexed 0..num_disturbances(s)-1. Dynamics are deterministic given the
/// disturbance.
template <class M>
concept DisturbanceModel = requires(const M& m, const typename M::State& s, std::size_t x) {
  typename M::State;
  { m.num_disturbances(s) } -> std::convertible_to<std::size_t>;
  { m.disturbance_logprob(x, s) } -> std::convertible_to<double>;
  { m.step(s, x) } -> std::same_as<typename M::State>;
  { m.is_failure(s) } -> std::convertible_to<bool>;
  { m.is_terminal(s) } -> std::convertible_to<bool>;
};

/// A disturbance model that can also report how close a state is to failure
/// (0 at failure). Used for surrogate elite ranking.
template <class M>
concept ProximityModel = DisturbanceModel<M> && requires(const M& m, const typename M::State& s) {
  { m.failure_distance(s) } -> std::convertible_to<double>;
};

/// Alternating state/disturbance sequence s0, x1, s1, ..., xN, sN with the
/// per-step log-likelihood of each disturbance under the model and under the
/// distribution that actually sampled it.
template <class State>
struct Trajectory {
  std::vector<State> states;
  std::vector<std::size_t> disturbances;
  std::vector<double> logp_model;
  std::vector<double> logp_sampler;
  bool ended_in_failure = false;

  std::size_t num_steps() const { return disturbances.size(); }

  double total_logp_model() const {
    double total = 0.0;
    for (double v : logp_model) total += v;
    return total;
  }

  double log_likelihood_ratio() const {
    double total = 0.0;
    for (std::size_t t = 0; t < logp_model.size(); ++t) total += logp_model[t] - logp_sampler[t];
    return total;
  }

  bool operator==(const Trajectory&) const = default;
};

}  // namespace faildist
