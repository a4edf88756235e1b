#pragma once

#include <cstddef>

#include "faildist/dp/grid.hpp"
#include "faildist/dp/value_iteration.hpp"
#include "faildist/sim/simulator.hpp"

namespace faildist::dp {

inline constexpr std::size_t kDefaultKnots = 15;

/// Ego plus adversary `adversary_index`: (ego pos, ego vel, adv pos, adv vel)
/// and (adv blinker, adv intended route). Throws ContractViolation on a bad index.
PairState pair_projection(const sim::SceneState& scene, std::size_t adversary_index);

/// The scene reduced to the ego and a single adversary, with no step limit.
/// Grid points are turned back into two-vehicle scenes at step 0.
class PairSubproblem {
 public:
  using State = sim::SceneState;

  PairSubproblem(const sim::ScenarioConfig& scenario, std::size_t adversary_index);

  const sim::Simulator& simulator() const { return sim_; }
  std::size_t adversary_index() const { return adversary_index_; }

  /// Ego pos over its route, adversary pos over its origin's longest route,
  /// both speeds over [0, max_speed]; 2 x 2 discrete values.
  GridSpec default_grid(std::size_t knots = kDefaultKnots) const;

  State reconstruct(const PairState& ps) const;
  PairState project(const State& s) const { return pair_projection(s, 0); }

  std::size_t num_disturbances(const State& s) const { return sim_.num_disturbances(s); }
  double disturbance_logprob(std::size_t x, const State& s) const { return sim_.disturbance_logprob(x, s); }
  State step(const State& s, std::size_t x) const { return sim_.step(s, x); }
  bool is_failure(const State& s) const { return sim_.is_failure(s); }
  bool is_terminal(const State& s) const { return sim_.is_terminal(s); }

 private:
  sim::Simulator sim_;
  std::size_t adversary_index_;
  sim::Origin origin_;
};

/// Solves the pair subproblem of every adversary in the scenario.
std::vector<ValueGrid> solve_all_pairs(const sim::ScenarioConfig& scenario, ValueIterationOptions opt,
                                       std::size_t knots = kDefaultKnots);

}  // namespace faildist::dp

namespace faildist::dp {

/// Value of a full scene read from one pair's grid.
class GridValueFunction {
 public:
  explicit GridValueFunction(const ValueGrid& grid) : grid_(&grid) {}
  double operator()(const sim::SceneState& s) const {
    return grid_->interpolate(pair_projection(s, grid_->pair_index()));
  }

 private:
  const ValueGrid* grid_;
};

}  // namespace faildist::dp
