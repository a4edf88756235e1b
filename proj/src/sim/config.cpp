#include "faildist/sim/config.hpp"

#include <cmath>
#include <string>

#include "faildist/core/errors.hpp"
#include "faildist/sim/disturbance.hpp"

namespace faildist::sim {

using nlohmann::json;

std::string_view to_string(RouteId r) {
  switch (r) {
    case RouteId::LeftStraight: return "left_straight";
    case RouteId::RightStraight: return "right_straight";
    case RouteId::RightTurn: return "right_turn";
    case RouteId::EgoLeftTurn: return "ego_left_turn";
  }
  return "unknown";
}

RouteId route_from_string(std::string_view s) {
  for (RouteId r : {RouteId::LeftStraight, RouteId::RightStraight, RouteId::RightTurn,
                    RouteId::EgoLeftTurn}) {
    if (to_string(r) == s) return r;
  }
  throw FormatError("unknown route '" + std::string(s) + "'");
}

std::string_view to_string(Origin o) { return o == Origin::Left ? "left" : "right"; }

Origin origin_from_string(std::string_view s) {
  if (s == "left") return Origin::Left;
  if (s == "right") return Origin::Right;
  throw ConfigError("unknown origin '" + std::string(s) + "' (expected left|right)");
}

std::string_view to_string(DisturbanceKind k) {
  static constexpr std::string_view names[] = {"none",         "medium_slow",    "major_slow",
                                               "medium_speed", "major_speed",    "toggle_blinker",
                                               "toggle_intent"};
  return names[static_cast<std::size_t>(k)];
}

DisturbanceKind disturbance_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kNumDisturbanceKinds; ++i) {
    const auto k = static_cast<DisturbanceKind>(i);
    if (to_string(k) == s) return k;
  }
  throw FormatError("unknown disturbance '" + std::string(s) + "'");
}

namespace {

double route_length_upper(const RoadConfig& road, Origin origin) {
  if (origin == Origin::Left) return road.left_approach + road.through_exit;
  return road.right_approach + road.through_exit;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Range read_range(const json& j) {
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  if (j.is_number()) return {j.get<double>(), j.get<double>()};
  throw ConfigError("range must be [lo, hi] or a number");
}

}  // namespace

void ScenarioConfig::validate() const {
  idm.validate();
  require(dt > 0, "dt must be positive");
  require(horizon > 0, "horizon must be positive");
  require(yield_margin >= 0, "yield_margin must be nonnegative");
  require(timing_speed_floor > 0, "timing_speed_floor must be positive");
  require(vehicle_length > 0 && vehicle_width > 0, "vehicle dimensions must be positive");
  require(vehicle_width < road.lane_width, "vehicles must fit in a lane");
  require(max_speed > 0, "max_speed must be positive");
  require(road.lane_width > 0 && road.ego_turn_radius > road.lane_width / 2 &&
              road.right_turn_radius > 0,
          "road radii/widths must be positive");
  require(road.ego_approach > 0 && road.ego_exit > 0 && road.through_exit > 0 &&
              road.stem_exit > 0,
          "road lengths must be positive");
  require(road.right_approach > road.lane_width / 2 + road.right_turn_radius,
          "right_approach must reach the turn");
  require(road.left_approach > road.ego_turn_radius, "left_approach too short");
  require(ego_speed >= 0 && ego_speed <= max_speed, "ego_speed outside [0, max_speed]");
  require(ego_start_pos >= 0 && ego_start_pos < road.ego_approach, "ego_start_pos outside approach");
  require(!adversaries.empty(), "scenario needs at least one adversary");
  for (const AdversarySpec& a : adversaries) {
    require(a.pos.lo <= a.pos.hi && a.vel.lo <= a.vel.hi, "range lo must not exceed hi");
    require(a.pos.lo >= 0 && a.pos.hi <= route_length_upper(road, a.origin),
            "adversary position range outside its route");
    require(a.vel.lo >= 0 && a.vel.hi <= max_speed, "adversary speed range outside [0, max_speed]");
    if (a.origin == Origin::Right) {
      require(a.pos.hi < road.right_approach - road.lane_width / 2 - road.right_turn_radius,
              "right-origin vehicles must start before the branch");
    }
  }
}

ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig cfg;
  if (j.contains("name")) cfg = default_scenario(j.at("name").get<std::string>());
  try {
    read(j, "dt", cfg.dt);
    read(j, "horizon", cfg.horizon);
    read(j, "yield_margin", cfg.yield_margin);
    read(j, "timing_speed_floor", cfg.timing_speed_floor);
    read(j, "vehicle_length", cfg.vehicle_length);
    read(j, "vehicle_width", cfg.vehicle_width);
    read(j, "max_speed", cfg.max_speed);
    read(j, "ego_start_pos", cfg.ego_start_pos);
    read(j, "ego_speed", cfg.ego_speed);
    if (j.contains("road")) {
      const json& r = j.at("road");
      read(r, "lane_width", cfg.road.lane_width);
      read(r, "ego_turn_radius", cfg.road.ego_turn_radius);
      read(r, "right_turn_radius", cfg.road.right_turn_radius);
      read(r, "ego_approach", cfg.road.ego_approach);
      read(r, "ego_exit", cfg.road.ego_exit);
      read(r, "left_approach", cfg.road.left_approach);
      read(r, "right_approach", cfg.road.right_approach);
      read(r, "through_exit", cfg.road.through_exit);
      read(r, "stem_exit", cfg.road.stem_exit);
    }
    if (j.contains("idm")) {
      const json& p = j.at("idm");
      read(p, "v_desired", cfg.idm.v_desired);
      read(p, "s_min", cfg.idm.s_min);
      read(p, "a_max", cfg.idm.a_max);
      read(p, "b_comf", cfg.idm.b_comf);
      read(p, "t_headway", cfg.idm.t_headway);
      read(p, "delta", cfg.idm.delta);
    }
    if (j.contains("adversaries")) {
      cfg.adversaries.clear();
      for (const json& a : j.at("adversaries")) {
        AdversarySpec spec;
        spec.origin = origin_from_string(a.at("origin").get<std::string>());
        spec.pos = read_range(a.at("pos"));
        spec.vel = read_range(a.at("vel"));
        read(a, "blinker", spec.blinker);
        read(a, "intent_turn", spec.intent_turn);
        cfg.adversaries.push_back(spec);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json to_json(const ScenarioConfig& cfg) {
  json adversaries = json::array();
  for (const AdversarySpec& a : cfg.adversaries) {
    adversaries.push_back({{"origin", std::string(to_string(a.origin))},
                           {"pos", {a.pos.lo, a.pos.hi}},
                           {"vel", {a.vel.lo, a.vel.hi}},
                           {"blinker", a.blinker},
                           {"intent_turn", a.intent_turn}});
  }
  return {{"name", cfg.name},
          {"dt", cfg.dt},
          {"horizon", cfg.horizon},
          {"yield_margin", cfg.yield_margin},
          {"timing_speed_floor", cfg.timing_speed_floor},
          {"vehicle_length", cfg.vehicle_length},
          {"vehicle_width", cfg.vehicle_width},
          {"max_speed", cfg.max_speed},
          {"ego_start_pos", cfg.ego_start_pos},
          {"ego_speed", cfg.ego_speed},
          {"road",
           {{"lane_width", cfg.road.lane_width},
            {"ego_turn_radius", cfg.road.ego_turn_radius},
            {"right_turn_radius", cfg.road.right_turn_radius},
            {"ego_approach", cfg.road.ego_approach},
            {"ego_exit", cfg.road.ego_exit},
            {"left_approach", cfg.road.left_approach},
            {"right_approach", cfg.road.right_approach},
            {"through_exit", cfg.road.through_exit},
            {"stem_exit", cfg.road.stem_exit}}},
          {"idm",
           {{"v_desired", cfg.idm.v_desired},
            {"s_min", cfg.idm.s_min},
            {"a_max", cfg.idm.a_max},
            {"b_comf", cfg.idm.b_comf},
            {"t_headway", cfg.idm.t_headway},
            {"delta", cfg.idm.delta}}},
          {"adversaries", adversaries}};
}

ScenarioConfig default_scenario(const std::string& name) {
  ScenarioConfig cfg;
  cfg.name = name;
  if (name == "two_car") {
    cfg.adversaries = {{Origin::Right, {0.0, 40.0}, {25.0, 29.0}, false, false}};
  } else if (name == "five_car") {
    cfg.adversaries = {
        {Origin::Left, {60.0, 75.0}, {25.0, 29.0}, false, false},
        {Origin::Left, {45.0, 60.0}, {25.0, 29.0}, false, false},
        {Origin::Right, {0.0, 30.0}, {25.0, 29.0}, true, true},
        {Origin::Right, {50.0, 65.0}, {25.0, 29.0}, false, false},
    };
  } else {
    throw ConfigError("unknown scenario '" + name + "' (expected two_car|five_car)");
  }
  return cfg;
}

}  // namespace faildist::sim
