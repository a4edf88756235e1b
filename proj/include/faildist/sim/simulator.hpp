#pragma once

#include <cstddef>
#include <optional>

#include "faildist/core/rng.hpp"
#include "faildist/sim/config.hpp"
#include "faildist/sim/disturbance.hpp"
#include "faildist/sim/road.hpp"
#include "faildist/sim/scene.hpp"

namespace faildist::sim {

/// Deterministic T-intersection simulator. All queries are pure functions of
/// their arguments; one instance may be shared by any number of threads.
///
/// Satisfies faildist::ProximityModel with disturbances indexed by
/// JointDisturbance::encode().
class Simulator {
 public:
  using State = SceneState;

  explicit Simulator(ScenarioConfig config);

  const ScenarioConfig& config() const { return config_; }
  const RoadNetwork& road() const { return road_; }
  std::size_t num_adversaries() const { return config_.adversaries.size(); }

  /// Modified IDM with rule-based yielding at the junction. Index 0 is the
  /// ego, i + 1 adversary i. Always finite.
  double compute_acceleration(std::size_t vehicle_index, const SceneState& scene) const;

  SceneState step(const SceneState& scene, const JointDisturbance& jd) const;
  bool is_failure(const SceneState& scene) const;
  bool is_terminal(const SceneState& scene) const;
  bool ego_exited(const SceneState& scene) const;
  double disturbance_logprob(const JointDisturbance& jd, const SceneState& scene) const;

  /// Ego at its fixed start, adversaries drawn uniformly from their ranges.
  SceneState initial_scene(Rng& rng) const;

  VehicleState make_ego(double pos, double vel) const;
  /// Right-origin vehicles take the turn route exactly when intent_turn is set.
  VehicleState make_adversary(Origin origin, double pos, double vel, bool blinker, bool intent_turn) const;

  /// Smallest footprint distance between the ego and any adversary.
  double min_clearance(const SceneState& scene) const;

  /// Route an observer infers for `v`. Right-origin vehicles are judged by
  /// their blinker until they reach the branch.
  RouteId perceived_route(const VehicleState& v) const;
  bool has_right_of_way(const VehicleState& v) const { return v.route != RouteId::EgoLeftTurn; }

  // Index-based interface used by the generic algorithms.
  std::size_t num_disturbances(const SceneState&) const {
    return num_adversaries() * kNumDisturbanceKinds;
  }
  double disturbance_logprob(std::size_t x, const SceneState& s) const {
    return disturbance_logprob(JointDisturbance::decode(x), s);
  }
  SceneState step(const SceneState& s, std::size_t x) const {
    return step(s, JointDisturbance::decode(x));
  }
  double failure_distance(const SceneState& s) const { return min_clearance(s); }

 private:
  struct Leader {
    double gap = 0.0;
    double vel = 0.0;
  };
  std::optional<Leader> leading_vehicle(std::size_t index, const SceneState& scene) const;
  VehicleState make_vehicle(RouteId route, double pos, double vel, bool blinker, bool intent) const;

  ScenarioConfig config_;
  RoadNetwork road_;
};

}  // namespace faildist::sim
