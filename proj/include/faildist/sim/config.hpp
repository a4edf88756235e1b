#pragma once

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "faildist/sim/idm.hpp"
#include "faildist/sim/scene.hpp"

namespace faildist::sim {

/// T-intersection layout. The through-road runs along x with the eastbound
/// lane at y = -w/2 and the westbound lane at y = +w/2; the stem leaves the
/// junction toward +y. Lengths are in meters.
struct RoadConfig {
  double lane_width = 3.0;
  double ego_turn_radius = 6.0;
  double right_turn_radius = 3.0;
  double ego_approach = 5.0;     // straight stem run before the left turn
  double ego_exit = 5.0;         // eastbound run after the turn
  double left_approach = 90.0;   // eastbound route start to x = 0
  double right_approach = 90.0;  // westbound route start to x = 0
  double through_exit = 5.0;     // through routes continue to |x| = through_exit
  double stem_exit = 20.0;       // right-turn run up the stem
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct AdversarySpec {
  Origin origin = Origin::Right;
  Range pos;  // initial arclength along the route
  Range vel;  // initial speed
  bool blinker = false;
  bool intent_turn = false;
};

struct ScenarioConfig {
  std::string name = "two_car";
  RoadConfig road;
  IdmParams idm;
  double dt = 0.18;
  int horizon = 50;
  double yield_margin = 2.5;        // epsilon on the exit-time test, s
  double timing_speed_floor = 0.1;  // m/s used in time-to-X estimates
  double vehicle_length = 4.0;
  double vehicle_width = 1.8;
  double max_speed = 32.0;  // upper bound of the state space (grid range)
  double ego_start_pos = 0.0;
  double ego_speed = 0.0;
  std::vector<AdversarySpec> adversaries;

  static constexpr int kUnlimitedHorizon = std::numeric_limits<int>::max();

  /// Throws ConfigError on inconsistent or out-of-bounds values.
  void validate() const;
};

ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& cfg);

/// Built-in defaults for the two scenarios ("two_car", "five_car").
ScenarioConfig default_scenario(const std::string& name);

}  // namespace faildist::sim
