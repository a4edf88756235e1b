#pragma once

#include <array>
#include <optional>

#include "faildist/sim/config.hpp"
#include "faildist/sim/geometry.hpp"
#include "faildist/sim/scene.hpp"

namespace faildist::sim {

/// Closed arclength interval; empty when enter > exit.
struct Interval {
  double enter = 1.0;
  double exit = 0.0;

  bool empty() const { return enter > exit; }
};

/// Route geometry plus the precomputed conflict regions between the ego's
/// turn and every adversary route.
class RoadNetwork {
 public:
  RoadNetwork(const RoadConfig& road, double half_length, double half_width);

  const Route& route(RouteId id) const { return routes_[static_cast<std::size_t>(id)]; }
  const RoadConfig& config() const { return config_; }

  /// Arclength on the westbound routes where the right turn departs.
  double branch_point() const { return branch_point_; }
  /// Arclength on the ego route where the turn ends and the eastbound run begins.
  double ego_turn_end() const { return ego_turn_end_; }

  /// Region of the ego route whose footprint can touch any adversary route.
  Interval ego_intersection() const { return ego_intersection_; }
  /// Region of `route` whose footprint can touch the ego's turn; empty if the
  /// two paths never meet.
  Interval conflict_on(RouteId route) const { return agent_conflict_[static_cast<std::size_t>(route)]; }

  OrientedRect footprint(const VehicleState& v) const;
  Pose pose(const VehicleState& v) const { return route(v.route).pose_at(v.pos); }

 private:
  RoadConfig config_;
  std::array<Route, kNumRoutes> routes_;
  std::array<Interval, kNumRoutes> agent_conflict_;
  Interval ego_intersection_;
  double branch_point_ = 0.0;
  double ego_turn_end_ = 0.0;
};

}  // namespace faildist::sim
