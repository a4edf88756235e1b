#include "faildist/dp/pair.hpp"

#include <algorithm>

#include "faildist/core/errors.hpp"

namespace faildist::dp {

namespace {

sim::ScenarioConfig pair_scenario(sim::ScenarioConfig cfg, std::size_t index) {
  if (index >= cfg.adversaries.size()) throw ContractViolation("pair: adversary index out of range");
  cfg.adversaries = {cfg.adversaries[index]};
  cfg.horizon = sim::ScenarioConfig::kUnlimitedHorizon;
  return cfg;
}

}  // namespace

PairState pair_projection(const sim::SceneState& scene, std::size_t adversary_index) {
  if (adversary_index >= scene.adversaries.size()) {
    throw ContractViolation("pair_projection: adversary index out of range");
  }
  const auto& adv = scene.adversaries[adversary_index];
  PairState ps;
  ps.continuous = {scene.ego.pos, scene.ego.vel, adv.pos, adv.vel};
  ps.discrete = {adv.blinker ? 1 : 0, adv.intent_turn ? 1 : 0};
  return ps;
}

PairSubproblem::PairSubproblem(const sim::ScenarioConfig& scenario, std::size_t adversary_index)
    : sim_(pair_scenario(scenario, adversary_index)),
      adversary_index_(adversary_index),
      origin_(scenario.adversaries[adversary_index].origin) {}

GridSpec PairSubproblem::default_grid(std::size_t knots) const {
  const auto& road = sim_.road();
  const double vmax = sim_.config().max_speed;
  double adv_len = road.route(sim::RouteId::LeftStraight).length();
  if (origin_ == sim::Origin::Right) {
    adv_len = std::max(road.route(sim::RouteId::RightStraight).length(),
                       road.route(sim::RouteId::RightTurn).length());
  }
  GridSpec spec;
  spec.axes = {Axis{0.0, road.route(sim::RouteId::EgoLeftTurn).length(), knots}, Axis{0.0, vmax, knots},
               Axis{0.0, adv_len, knots}, Axis{0.0, vmax, knots}};
  spec.discrete_sizes = {2, 2};
  return spec;
}

sim::SceneState PairSubproblem::reconstruct(const PairState& ps) const {
  sim::SceneState s;
  s.dt = sim_.config().dt;
  s.step_index = 0;
  s.ego = sim_.make_ego(ps.continuous[0], ps.continuous[1]);
  s.adversaries = {sim_.make_adversary(origin_, ps.continuous[2], ps.continuous[3], ps.discrete[0] != 0,
                                       ps.discrete[1] != 0)};
  return s;
}

std::vector<ValueGrid> solve_all_pairs(const sim::ScenarioConfig& scenario, ValueIterationOptions opt,
                                       std::size_t knots) {
  std::vector<ValueGrid> out;
  for (std::size_t i = 0; i < scenario.adversaries.size(); ++i) {
    PairSubproblem sub(scenario, i);
    opt.pair_index = i;
    out.push_back(value_iteration(sub, sub.default_grid(knots), opt));
  }
  return out;
}

}  // namespace faildist::dp
