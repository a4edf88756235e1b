#include "faildist/sim/road.hpp"

#include <algorithm>
#include <numbers>
#include <vector>

namespace faildist::sim {

namespace {

constexpr double kConflictSampleStep = 0.2;  // m

std::vector<double> samples(double lo, double hi) {
  std::vector<double> out;
  for (double s = lo; s <= hi + 1e-9; s += kConflictSampleStep) out.push_back(s);
  return out;
}

}  // namespace

RoadNetwork::RoadNetwork(const RoadConfig& road, double half_length, double half_width)
    : config_(road) {
  const double half_lane = road.lane_width / 2.0;
  constexpr double pi = std::numbers::pi;

  auto& left = routes_[static_cast<std::size_t>(RouteId::LeftStraight)];
  left = Route({-road.left_approach, -half_lane}, 0.0);
  left.line(road.left_approach + road.through_exit);

  auto& right = routes_[static_cast<std::size_t>(RouteId::RightStraight)];
  right = Route({road.right_approach, half_lane}, pi);
  right.line(road.right_approach + road.through_exit);

  branch_point_ = road.right_approach - (half_lane + road.right_turn_radius);
  auto& right_turn = routes_[static_cast<std::size_t>(RouteId::RightTurn)];
  right_turn = Route({road.right_approach, half_lane}, pi);
  right_turn.line(branch_point_).arc(road.right_turn_radius, pi / 2, false).line(road.stem_exit);

  auto& ego = routes_[static_cast<std::size_t>(RouteId::EgoLeftTurn)];
  ego = Route({-half_lane, road.ego_turn_radius - half_lane + road.ego_approach}, -pi / 2);
  ego.line(road.ego_approach).arc(road.ego_turn_radius, pi / 2, true).line(road.ego_exit);
  ego_turn_end_ = road.ego_approach + road.ego_turn_radius * pi / 2;

  // Conflict regions: sample both paths and record where footprints meet.
  // Only the ego's approach and turn count; once it runs along the eastbound
  // lane the interaction is ordinary car following.
  auto rect_at = [&](const Route& r, double s) {
    const Pose p = r.pose_at(s);
    return OrientedRect{p.position, p.heading, half_length, half_width};
  };
  const auto ego_samples = samples(0.0, ego_turn_end_);
  std::vector<OrientedRect> ego_rects;
  for (double s : ego_samples) ego_rects.push_back(rect_at(ego, s));
  const double reach = 2.0 * std::hypot(half_length, half_width);

  for (RouteId id : {RouteId::LeftStraight, RouteId::RightStraight, RouteId::RightTurn}) {
    const Route& r = route(id);
    Interval on_agent, on_ego;
    for (double sa : samples(0.0, r.length())) {
      const OrientedRect ra = rect_at(r, sa);
      for (std::size_t k = 0; k < ego_samples.size(); ++k) {
        if (norm(ra.center - ego_rects[k].center) > reach) continue;
        if (!overlaps(ra, ego_rects[k])) continue;
        if (on_agent.empty()) {
          on_agent = {sa, sa};
        } else {
          on_agent.enter = std::min(on_agent.enter, sa);
          on_agent.exit = std::max(on_agent.exit, sa);
        }
        if (on_ego.empty()) {
          on_ego = {ego_samples[k], ego_samples[k]};
        } else {
          on_ego.enter = std::min(on_ego.enter, ego_samples[k]);
          on_ego.exit = std::max(on_ego.exit, ego_samples[k]);
        }
      }
    }
    agent_conflict_[static_cast<std::size_t>(id)] = on_agent;
    if (on_ego.empty()) continue;
    if (ego_intersection_.empty()) {
      ego_intersection_ = on_ego;
    } else {
      ego_intersection_.enter = std::min(ego_intersection_.enter, on_ego.enter);
      ego_intersection_.exit = std::max(ego_intersection_.exit, on_ego.exit);
    }
  }
}

OrientedRect RoadNetwork::footprint(const VehicleState& v) const {
  const Pose p = pose(v);
  return {p.position, p.heading, v.half_length, v.half_width};
}

}  // namespace faildist::sim
