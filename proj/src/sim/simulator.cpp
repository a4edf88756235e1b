#include "faildist/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "faildist/core/errors.hpp"

namespace faildist::sim {

namespace {

constexpr double kMinLeaderGap = 1e-3;  // m; keeps IDM finite when bumpers touch
const double kAlignedCos = std::cos(std::numbers::pi / 4);

// Time to travel `distance` starting at speed v under constant acceleration a.
double time_to_cover(double distance, double v, double a) {
  if (distance <= 0.0) return 0.0;
  return (-v + std::sqrt(v * v + 2.0 * a * distance)) / a;
}

}  // namespace

Simulator::Simulator(ScenarioConfig config)
    : config_((config.validate(), std::move(config))),
      road_(config_.road, config_.vehicle_length / 2.0, config_.vehicle_width / 2.0) {}

VehicleState Simulator::make_vehicle(RouteId route, double pos, double vel, bool blinker,
                                     bool intent) const {
  return {route, pos, vel, blinker, intent, config_.vehicle_length / 2.0,
          config_.vehicle_width / 2.0};
}

RouteId Simulator::perceived_route(const VehicleState& v) const {
  switch (v.route) {
    case RouteId::EgoLeftTurn:
      return RouteId::EgoLeftTurn;
    case RouteId::LeftStraight:
      // A left turn from this side still cuts across the ego's path.
      return RouteId::LeftStraight;
    case RouteId::RightStraight:
    case RouteId::RightTurn:
      // Past the branch the route is visible regardless of the blinker.
      if (v.pos >= road_.branch_point()) return v.route;
      return v.blinker ? RouteId::RightTurn : RouteId::RightStraight;
  }
  return v.route;
}

std::optional<Simulator::Leader> Simulator::leading_vehicle(std::size_t index,
                                                            const SceneState& scene) const {
  const VehicleState& self = scene.vehicle(index);
  const Pose p = road_.pose(self);
  const Vec2 fwd = unit(p.heading);
  const Vec2 left{-fwd.y, fwd.x};
  const double half_lane = config_.road.lane_width / 2.0;

  std::optional<Leader> best;
  for (std::size_t j = 0; j < scene.num_vehicles(); ++j) {
    if (j == index) continue;
    const VehicleState& other = scene.vehicle(j);
    const Pose q = road_.pose(other);
    const Vec2 d = q.position - p.position;
    const double lon = dot(d, fwd);
    if (lon <= 0.0 || std::abs(dot(d, left)) > half_lane) continue;
    const double cos_rel = std::cos(q.heading - p.heading);
    if (cos_rel < kAlignedCos) continue;
    const double gap = std::max(kMinLeaderGap, lon - self.half_length - other.half_length);
    if (!best || gap < best->gap) best = Leader{gap, other.vel * cos_rel};
  }
  return best;
}

double Simulator::compute_acceleration(std::size_t index, const SceneState& scene) const {
  const VehicleState& self = scene.vehicle(index);
  const auto leader = leading_vehicle(index, scene);
  const double lead_gap = leader ? leader->gap : std::numeric_limits<double>::infinity();
  double acc = idm_acceleration(lead_gap, self.vel, leader ? leader->vel : 0.0, config_.idm);
  if (has_right_of_way(self)) return acc;

  const Interval zone = road_.ego_intersection();
  const double to_junction = zone.enter - self.pos;
  // Once inside the junction the manoeuvre is committed.
  if (zone.empty() || to_junction <= 0.0 || to_junction >= lead_gap) return acc;

  const double floor = config_.timing_speed_floor;
  const double time_to_cross = time_to_cover(zone.exit - self.pos, self.vel, config_.idm.a_max);
  for (std::size_t j = 0; j < scene.num_vehicles(); ++j) {
    if (j == index) continue;
    const VehicleState& agent = scene.vehicle(j);
    const Interval conflict = road_.conflict_on(perceived_route(agent));
    if (conflict.empty() || agent.pos > conflict.exit) continue;
    const double speed = std::max(agent.vel, floor);
    const double time_to_enter = std::max(0.0, conflict.enter - agent.pos) / speed;
    const double time_to_exit = (conflict.exit - agent.pos) / speed;
    if (time_to_enter < time_to_cross && time_to_exit + config_.yield_margin > time_to_cross) {
      acc = idm_acceleration(to_junction, self.vel, 0.0, config_.idm);
      break;
    }
  }
  return acc;
}

SceneState Simulator::step(const SceneState& scene, const JointDisturbance& jd) const {
  if (is_terminal(scene)) throw ContractViolation("step: scene is terminal");
  if (jd.actor_index >= scene.adversaries.size()) {
    throw ContractViolation("step: disturbance actor out of range");
  }
  const double dt = scene.dt;
  const std::size_t n = scene.num_vehicles();

  std::vector<double> acc(n);
  for (std::size_t i = 0; i < n; ++i) acc[i] = compute_acceleration(i, scene);
  acc[jd.actor_index + 1] += accel_delta(jd.kind);

  SceneState next = scene;
  auto advance = [dt](VehicleState& v, double a) {
    const double v_end = v.vel + a * dt;
    if (v_end >= 0.0) {
      v.pos += v.vel * dt + 0.5 * a * dt * dt;
      v.vel = v_end;
    } else {
      // Stops inside the step: travel the braking distance, never reverse.
      v.pos += v.vel * v.vel / (-2.0 * a);
      v.vel = 0.0;
    }
  };
  advance(next.ego, acc[0]);
  for (std::size_t i = 0; i < next.adversaries.size(); ++i) advance(next.adversaries[i], acc[i + 1]);

  VehicleState& actor = next.adversaries[jd.actor_index];
  if (jd.kind == DisturbanceKind::ToggleBlinker) {
    actor.blinker = !actor.blinker;
  } else if (jd.kind == DisturbanceKind::ToggleIntent) {
    if (actor.route == RouteId::LeftStraight) {
      actor.intent_turn = !actor.intent_turn;
    } else if (actor.pos < road_.branch_point()) {
      // Route choice stays open until the vehicle reaches the branch.
      actor.intent_turn = !actor.intent_turn;
      actor.route = actor.intent_turn ? RouteId::RightTurn : RouteId::RightStraight;
    }
  }
  next.step_index += 1;
  return next;
}

bool Simulator::is_failure(const SceneState& scene) const {
  const OrientedRect ego = road_.footprint(scene.ego);
  for (const VehicleState& adv : scene.adversaries) {
    if (overlaps(ego, road_.footprint(adv))) return true;
  }
  return false;
}

bool Simulator::ego_exited(const SceneState& scene) const {
  return scene.ego.pos > road_.route(RouteId::EgoLeftTurn).length();
}

bool Simulator::is_terminal(const SceneState& scene) const {
  return scene.step_index >= config_.horizon || ego_exited(scene) || is_failure(scene);
}

double Simulator::disturbance_logprob(const JointDisturbance& jd, const SceneState& scene) const {
  const double actors = static_cast<double>(scene.adversaries.size());
  return std::log(nominal_prob(jd.kind)) - std::log(actors);
}

double Simulator::min_clearance(const SceneState& scene) const {
  const OrientedRect ego = road_.footprint(scene.ego);
  double best = std::numeric_limits<double>::infinity();
  for (const VehicleState& adv : scene.adversaries) {
    best = std::min(best, separation(ego, road_.footprint(adv)));
  }
  return best;
}

SceneState Simulator::initial_scene(Rng& rng) const {
  SceneState scene;
  scene.dt = config_.dt;
  scene.step_index = 0;
  scene.ego = make_ego(config_.ego_start_pos, config_.ego_speed);
  for (const AdversarySpec& spec : config_.adversaries) {
    const double pos = uniform(rng, spec.pos.lo, spec.pos.hi);
    const double vel = uniform(rng, spec.vel.lo, spec.vel.hi);
    scene.adversaries.push_back(make_adversary(spec.origin, pos, vel, spec.blinker, spec.intent_turn));
  }
  return scene;
}

VehicleState Simulator::make_ego(double pos, double vel) const {
  return make_vehicle(RouteId::EgoLeftTurn, pos, vel, true, true);
}

VehicleState Simulator::make_adversary(Origin origin, double pos, double vel, bool blinker,
                                       bool intent_turn) const {
  RouteId route = RouteId::LeftStraight;
  if (origin == Origin::Right) route = intent_turn ? RouteId::RightTurn : RouteId::RightStraight;
  return make_vehicle(route, pos, vel, blinker, intent_turn);
}

}  // namespace faildist::sim
