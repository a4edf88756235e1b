#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "faildist/baselines/baselines.hpp"
#include "faildist/core/errors.hpp"
#include "faildist/core/model.hpp"

namespace faildist::harness {

struct EvalOptions {
  std::size_t rate_rollouts = 1000;
  std::size_t failures = 100;  // wanted for the log-likelihood
  std::size_t max_rollouts = 1'000'000;
  std::size_t batch = 1000;  // rollouts per batch after the first rate_rollouts
  std::size_t threads = 1;

  void validate() const {
    if (rate_rollouts == 0 || batch == 0) throw ConfigError("eval: rollout counts must be positive");
    if (max_rollouts < rate_rollouts) throw ConfigError("eval: max_rollouts below rate_rollouts");
  }
};

/// Mean and standard error of a sample; both 0 when it is empty.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(std::span<const double> xs) {
  if (xs.empty()) return {};
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double n = static_cast<double>(xs.size());
  return {m, std::sqrt(ss / (n - 1.0) / n)};
}

/// Wall-clock time is kept out of the report so reports are reproducible.
struct MetricsReport {
  std::string method;
  std::uint64_t seed = 0;
  std::size_t n_rollouts = 0;
  std::size_t n_failures = 0;  // among the n_rollouts
  double failure_rate = 0.0;
  double failure_rate_std = 0.0;  // sqrt(r (1 - r) / n)
  std::size_t n_failures_used = 0;
  std::size_t loglik_rollouts = 0;  // rollouts sampled to collect them
  std::size_t failures_seen = 0;    // failures among those loglik_rollouts
  double loglik_step = 0.0;         // mean over failures of sum(log p) / N
  double loglik_step_se = 0.0;
  double loglik_total = 0.0;  // mean over failures of sum(log p)
  double loglik_total_se = 0.0;
  bool insufficient_failures = false;

  bool operator==(const MetricsReport&) const = default;
};

/// Fills the rate fields from a count of failures in n rollouts.
inline void set_failure_rate(MetricsReport& r, std::size_t failures, std::size_t n) {
  if (n == 0 || failures > n) throw ContractViolation("set_failure_rate: bad counts");
  r.n_rollouts = n;
  r.n_failures = failures;
  r.failure_rate = static_cast<double>(failures) / static_cast<double>(n);
  r.failure_rate_std = std::sqrt(r.failure_rate * (1.0 - r.failure_rate) / static_cast<double>(n));
}

/// Fills the likelihood fields from failure trajectories.
template <class State>
void set_log_likelihood(MetricsReport& r, std::span<const Trajectory<State>> failures, std::size_t wanted) {
  std::vector<double> per_step, total;
  for (const auto& t : failures) {
    if (!t.ended_in_failure) throw ContractViolation("set_log_likelihood: not a failure trajectory");
    const double lp = t.total_logp_model();
    total.push_back(lp);
    per_step.push_back(t.num_steps() > 0 ? lp / static_cast<double>(t.num_steps()) : 0.0);
  }
  const MeanSe s = mean_se(per_step), tot = mean_se(total);
  r.n_failures_used = failures.size();
  r.loglik_step = s.mean;
  r.loglik_step_se = s.se;
  r.loglik_total = tot.mean;
  r.loglik_total_se = tot.se;
  r.insufficient_failures = failures.size() < wanted;
}

template <class State>
struct Evaluation {
  MetricsReport report;
  std::vector<Trajectory<State>> failures;  // the ones used for the likelihood, in rollout order
  std::vector<Trajectory<State>> first;     // the first few rollouts, kept for inspection
};

/// Rolls out the proposal rate_rollouts times for the failure rate, then keeps
/// sampling in fixed batches until enough failures exist for the likelihood
/// or max_rollouts is reached. Rollout i always uses the same streams, so the
/// result does not depend on the thread count.
template <DisturbanceModel M, class Init, class Proposal>
Evaluation<typename M::State> evaluate(const M& model, const Init& initial_state, const Proposal& proposal,
                                       const std::string& method, const baselines::Streams& streams,
                                       const EvalOptions& opt, std::size_t keep_first = 0) {
  opt.validate();
  using State = typename M::State;
  Evaluation<State> ev;
  ev.report.method = method;
  ev.report.seed = streams.seed;

  std::size_t done = 0;
  std::size_t rate_failures = 0;
  std::size_t seen = 0;
  while (done < opt.max_rollouts && (done == 0 || ev.failures.size() < opt.failures)) {
    const std::size_t n = std::min(done == 0 ? opt.rate_rollouts : opt.batch, opt.max_rollouts - done);
    auto trajs = baselines::run_rollouts(model, done, n, initial_state, proposal, streams, opt.threads);
    for (std::size_t k = 0; k < trajs.size(); ++k) {
      if (trajs[k].ended_in_failure) {
        ++seen;
        if (done == 0) ++rate_failures;
      }
      if (done + k < keep_first) ev.first.push_back(trajs[k]);
      if (trajs[k].ended_in_failure && ev.failures.size() < opt.failures) {
        ev.failures.push_back(std::move(trajs[k]));
      }
    }
    done += n;
  }
  set_failure_rate(ev.report, rate_failures, opt.rate_rollouts);
  ev.report.loglik_rollouts = done;
  ev.report.failures_seen = seen;
  set_log_likelihood<State>(ev.report, ev.failures, opt.failures);
  return ev;
}

}  // namespace faildist::harness
