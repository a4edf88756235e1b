#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "faildist/core/errors.hpp"
#include "faildist/core/model.hpp"
#include "faildist/core/parallel.hpp"
#include "faildist/core/rng.hpp"
#include "faildist/policy/policy.hpp"

namespace faildist::baselines {

/// Stream coordinates for a batch of rollouts. Rollout i draws its start
/// state from make_stream(seed, initial, sub, i) and its disturbances from
/// make_stream(seed, disturbance, sub, i).
struct Streams {
  std::uint64_t seed = 0;
  std::uint64_t initial = 0;
  std::uint64_t disturbance = 1;
  std::uint64_t sub = 0;
};

/// Runs rollouts first..first+n-1. `initial_state(rng)` draws a start state and
/// `proposal(s)` returns the sampling distribution over disturbances at s.
template <DisturbanceModel M, class Init, class Proposal>
std::vector<Trajectory<typename M::State>> run_rollouts(const M& model, std::size_t first, std::size_t n,
                                                        const Init& initial_state, const Proposal& proposal,
                                                        const Streams& streams, std::size_t threads = 1) {
  std::vector<Trajectory<typename M::State>> out(n);
  parallel_for(n, threads, [&](std::size_t k) {
    Rng init_rng = make_stream(streams.seed, streams.initial, streams.sub, first + k);
    Rng rng = make_stream(streams.seed, streams.disturbance, streams.sub, first + k);
    out[k] = policy::sample_rollout(model, initial_state(init_rng), rng, proposal);
  });
  return out;
}

/// Samples from the model itself.
template <DisturbanceModel M>
auto nominal_proposal(const M& model) {
  return [&model](const typename M::State& s) { return policy::model_distribution(model, s); };
}

/// Uniform over every disturbance available at s.
template <DisturbanceModel M>
auto uniform_proposal(const M& model) {
  return [&model](const typename M::State& s) {
    const std::size_t n = model.num_disturbances(s);
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
  };
}

inline constexpr double kProbabilityFloor = 1e-6;

/// State-independent categorical over disturbance indices.
struct CategoricalProposal {
  std::vector<double> probs;

  /// Normalizes nonnegative weights and mixes in a floor so every entry is at
  /// least p_floor: p = (1 - K p_floor) w / sum(w) + p_floor.
  static CategoricalProposal from_weights(std::vector<double> w, double p_floor = kProbabilityFloor) {
    const double k = static_cast<double>(w.size());
    if (w.empty() || !(p_floor >= 0.0) || p_floor * k >= 1.0) {
      throw ContractViolation("CategoricalProposal: bad size or floor");
    }
    double total = 0.0;
    for (double x : w) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw ContractViolation("CategoricalProposal: bad weight");
      total += x;
    }
    if (!(total > 0.0)) throw ContractViolation("CategoricalProposal: weights sum to zero");
    for (double& x : w) x = (1.0 - k * p_floor) * x / total + p_floor;
    return {std::move(w)};
  }

  template <class State>
  const std::vector<double>& operator()(const State&) const {
    return probs;
  }
};

template <DisturbanceModel M, class Init>
std::vector<Trajectory<typename M::State>> mc_rollouts(const M& model, std::size_t n, const Init& init,
                                                       const Streams& streams, std::size_t threads = 1) {
  return run_rollouts(model, 0, n, init, nominal_proposal(model), streams, threads);
}

template <DisturbanceModel M, class Init>
std::vector<Trajectory<typename M::State>> uniform_is_rollouts(const M& model, std::size_t n, const Init& init,
                                                               const Streams& streams, std::size_t threads = 1) {
  return run_rollouts(model, 0, n, init, uniform_proposal(model), streams, threads);
}

/// Closest approach to failure along a trajectory; 0 for a failure.
template <ProximityModel M>
double min_failure_distance(const M& model, const Trajectory<typename M::State>& t) {
  if (t.ended_in_failure) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : t.states) best = std::min(best, static_cast<double>(model.failure_distance(s)));
  return best;
}

struct CemOptions {
  std::size_t n_per_iter = 100;
  std::size_t n_iters = 20;
  double elite_fraction = 0.1;
  /// Weight of the previous proposal in the refit.
  double smoothing = 0.7;
  double p_floor = kProbabilityFloor;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const {
    if (!(elite_fraction > 0.0 && elite_fraction < 1.0)) {
      throw ContractViolation("cem: elite fraction must be in (0, 1)");
    }
    if (!(smoothing >= 0.0 && smoothing <= 1.0)) throw ContractViolation("cem: smoothing must be in [0, 1]");
    if (n_per_iter == 0) throw ContractViolation("cem: n_per_iter must be positive");
  }
};

struct CemIteration {
  std::size_t iteration = 0;
  std::size_t failures = 0;
  std::size_t elites = 0;
  /// Largest closest-approach distance admitted to the elite set.
  double elite_threshold = 0.0;
};

struct CemResult {
  CategoricalProposal proposal;
  std::vector<CemIteration> history;
  /// No iteration produced a single failure.
  bool no_failures = true;
};

inline constexpr std::uint64_t kCemInitialStream = 0x63656d30;
inline constexpr std::uint64_t kCemStream = 0x63656d31;

/// Cross-entropy optimization of a state-independent categorical proposal.
/// Each iteration samples n_per_iter rollouts, keeps every failure (or, if
/// there are fewer than the elite count, the trajectories that came closest
/// to failing) and refits the disturbance frequencies of the elites, each
/// weighted by its likelihood ratio p/q. The refit is blended with the
/// previous proposal and floored.
template <ProximityModel M, class Init>
CemResult cem_optimize(const M& model, const Init& initial_state, const CemOptions& opt) {
  opt.validate();
  Rng rng0 = make_stream(opt.seed, kCemInitialStream, 0, 0);
  CemResult res{CategoricalProposal::from_weights(policy::model_distribution(model, initial_state(rng0)),
                                                  opt.p_floor),
                {},
                true};
  const std::size_t k = res.proposal.probs.size();
  const auto n_elite = static_cast<std::size_t>(
      std::max(1.0, std::ceil(opt.elite_fraction * static_cast<double>(opt.n_per_iter))));

  for (std::size_t it = 0; it < opt.n_iters; ++it) {
    const CategoricalProposal current = res.proposal;
    auto trajs = run_rollouts(model, 0, opt.n_per_iter, initial_state, current,
                              Streams{opt.seed, kCemInitialStream, kCemStream, it}, opt.threads);
    for (const auto& t : trajs) {
      if (t.num_steps() > 0 && model.num_disturbances(t.states.front()) != k) {
        throw ContractViolation("cem: disturbance count varies between states");
      }
    }

    std::vector<double> dist(trajs.size());
    std::size_t failures = 0;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      dist[i] = min_failure_distance(model, trajs[i]);
      failures += trajs[i].ended_in_failure ? 1 : 0;
    }
    std::vector<std::size_t> order(trajs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
    const std::size_t elites = std::max(failures, std::min(n_elite, trajs.size()));
    if (failures > 0) res.no_failures = false;

    // Likelihood ratios in log space, rescaled by the largest before exponentiating.
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < elites; ++r) top = std::max(top, trajs[order[r]].log_likelihood_ratio());
    std::vector<double> counts(k, 0.0);
    for (std::size_t r = 0; r < elites; ++r) {
      const auto& t = trajs[order[r]];
      const double w = std::exp(t.log_likelihood_ratio() - top);
      for (std::size_t x : t.disturbances) counts[x] += w;
    }
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (total > 0.0) {
      std::vector<double> blended(k);
      for (std::size_t x = 0; x < k; ++x) {
        blended[x] = opt.smoothing * current.probs[x] + (1.0 - opt.smoothing) * counts[x] / total;
      }
      res.proposal = CategoricalProposal::from_weights(std::move(blended), opt.p_floor);
    }
    res.history.push_back({it, failures, elites, elites > 0 ? dist[order[elites - 1]] : 0.0});
  }
  return res;
}

}  // namespace faildist::baselines
