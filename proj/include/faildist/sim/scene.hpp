#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace faildist::sim {

enum class RouteId : std::uint8_t { LeftStraight, RightStraight, RightTurn, EgoLeftTurn };
inline constexpr std::size_t kNumRoutes = 4;

/// Which end of the through-road an adversary enters from.
enum class Origin : std::uint8_t { Left, Right };

std::string_view to_string(RouteId r);
RouteId route_from_string(std::string_view s);
std::string_view to_string(Origin o);
Origin origin_from_string(std::string_view s);

inline Origin origin_of(RouteId r) {
  return r == RouteId::LeftStraight ? Origin::Left : Origin::Right;
}

struct VehicleState {
  RouteId route = RouteId::EgoLeftTurn;
  double pos = 0.0;  // m along route
  double vel = 0.0;  // m/s along route, never negative
  bool blinker = false;      // observable turn signal
  bool intent_turn = false;  // hidden route choice at the junction
  double half_length = 2.0;
  double half_width = 0.9;

  bool operator==(const VehicleState&) const = default;
};

/// Full Markov state: ego, adversaries and clock. Treated as an immutable value.
struct SceneState {
  VehicleState ego;
  std::vector<VehicleState> adversaries;
  int step_index = 0;
  double dt = 0.18;

  std::size_t num_vehicles() const { return adversaries.size() + 1; }
  /// Index 0 is the ego, i + 1 is adversary i.
  const VehicleState& vehicle(std::size_t index) const {
    return index == 0 ? ego : adversaries[index - 1];
  }

  bool operator==(const SceneState&) const = default;
};

}  // namespace faildist::sim
