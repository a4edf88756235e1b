#pragma once

// Small enumerable MDP used as an exact oracle: a walker on positions 0..4
// starting at 2, three disturbances (left, stay, right) with position
// dependent probabilities, failure at 4, safe exit at 0, horizon 6.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "faildist/core/model.hpp"
#include "faildist/dp/grid.hpp"
#include "faildist/policy/policy.hpp"

namespace faildist::testing {

struct ChainState {
  int k = 2;
  int t = 0;
  bool operator==(const ChainState&) const = default;
};

class ChainMdp {
 public:
  using State = ChainState;
  static constexpr int kFail = 4;
  static constexpr int kHorizon = 6;

  std::size_t num_disturbances(const State&) const { return 3; }

  double prob(std::size_t x, const State& s) const {
    const double right = 0.2 + 0.1 * s.k;
    const double left = 0.3;
    if (x == 0) return left;
    if (x == 2) return right;
    return 1.0 - left - right;
  }
  double disturbance_logprob(std::size_t x, const State& s) const { return std::log(prob(x, s)); }

  State step(const State& s, std::size_t x) const { return {s.k + static_cast<int>(x) - 1, s.t + 1}; }
  bool is_failure(const State& s) const { return s.k >= kFail; }
  bool is_terminal(const State& s) const { return s.k <= 0 || s.k >= kFail || s.t >= kHorizon; }
  double failure_distance(const State& s) const { return static_cast<double>(kFail - s.k); }

  // Grid plumbing: k on axis 0, t on axis 1, the rest degenerate.
  dp::PairState project(const State& s) const {
    dp::PairState ps;
    ps.continuous = {static_cast<double>(s.k), static_cast<double>(s.t), 0.0, 0.0};
    return ps;
  }
  State reconstruct(const dp::PairState& ps) const {
    return {static_cast<int>(std::lround(ps.continuous[0])), static_cast<int>(std::lround(ps.continuous[1]))};
  }
  static dp::GridSpec grid() {
    dp::GridSpec g;
    g.axes[0] = {0.0, 4.0, 5};
    g.axes[1] = {0.0, 6.0, 7};
    g.axes[2] = {0.0, 0.0, 1};
    g.axes[3] = {0.0, 0.0, 1};
    return g;
  }
};

/// Exact failure probability by recursion over every disturbance sequence.
inline double exact_value(const ChainMdp& m, const ChainState& s) {
  if (m.is_failure(s)) return 1.0;
  if (m.is_terminal(s)) return 0.0;
  double v = 0.0;
  for (std::size_t x = 0; x < 3; ++x) v += m.prob(x, s) * exact_value(m, m.step(s, x));
  return v;
}

struct EnumeratedPath {
  std::vector<std::size_t> xs;
  double prob = 1.0;
  bool failure = false;
};

/// Every complete trajectory from s0 with its probability under p.
inline std::vector<EnumeratedPath> enumerate_paths(const ChainMdp& m, const ChainState& s0) {
  std::vector<EnumeratedPath> out;
  std::function<void(const ChainState&, EnumeratedPath)> rec = [&](const ChainState& s, EnumeratedPath path) {
    if (m.is_terminal(s)) {
      path.failure = m.is_failure(s);
      out.push_back(std::move(path));
      return;
    }
    for (std::size_t x = 0; x < 3; ++x) {
      EnumeratedPath next = path;
      next.xs.push_back(x);
      next.prob *= m.prob(x, s);
      rec(m.step(s, x), std::move(next));
    }
  };
  rec(s0, {});
  return out;
}

/// Exact value function, tabulated once.
class ExactChainValue {
 public:
  explicit ExactChainValue(const ChainMdp& m) {
    for (int k = 0; k <= ChainMdp::kFail; ++k) {
      for (int t = 0; t <= ChainMdp::kHorizon; ++t) table_[k][t] = exact_value(m, {k, t});
    }
  }
  double operator()(const ChainState& s) const { return table_.at(s.k).at(s.t); }

 private:
  std::array<std::array<double, ChainMdp::kHorizon + 1>, ChainMdp::kFail + 1> table_{};
};

/// Probability the failure policy assigns to a whole disturbance sequence,
/// computed from its per-step distributions rather than by sampling.
template <class VF>
double policy_path_prob(const ChainMdp& m, ChainState s, const std::vector<std::size_t>& xs, const VF& vf,
                        const policy::PolicyOptions& opt) {
  double prob = 1.0;
  for (std::size_t x : xs) {
    prob *= policy::policy_distribution(m, s, vf, opt)[x];
    s = m.step(s, x);
  }
  return prob;
}

}  // namespace faildist::testing
