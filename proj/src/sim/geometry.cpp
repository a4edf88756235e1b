#include "faildist/sim/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace faildist::sim {

std::array<Vec2, 4> OrientedRect::corners() const {
  const Vec2 f = unit(heading);
  const Vec2 l{-f.y, f.x};
  const Vec2 df = half_length * f;
  const Vec2 dl = half_width * l;
  return {center + df + dl, center + df - dl, center - df - dl, center - df + dl};
}

namespace {

// Projects both rectangles on `axis` and reports whether the intervals are disjoint.
bool separated_on(const std::array<Vec2, 4>& a, const std::array<Vec2, 4>& b, Vec2 axis) {
  double amin = std::numeric_limits<double>::infinity(), amax = -amin;
  double bmin = amin, bmax = -amin;
  for (const Vec2& p : a) {
    const double d = dot(p, axis);
    amin = std::min(amin, d);
    amax = std::max(amax, d);
  }
  for (const Vec2& p : b) {
    const double d = dot(p, axis);
    bmin = std::min(bmin, d);
    bmax = std::max(bmax, d);
  }
  return amax < bmin || bmax < amin;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

}  // namespace

bool overlaps(const OrientedRect& a, const OrientedRect& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const std::array<Vec2, 4> axes{unit(a.heading), unit(a.heading + std::numbers::pi / 2),
                                 unit(b.heading), unit(b.heading + std::numbers::pi / 2)};
  for (const Vec2& axis : axes) {
    if (separated_on(ca, cb, axis)) return false;
  }
  return true;
}

double separation(const OrientedRect& a, const OrientedRect& b) {
  if (overlaps(a, b)) return 0.0;
  const auto ca = a.corners();
  const auto cb = b.corners();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      best = std::min(best, point_segment_distance(ca[i], cb[j], cb[(j + 1) % 4]));
      best = std::min(best, point_segment_distance(cb[i], ca[j], ca[(j + 1) % 4]));
    }
  }
  return best;
}

Route::Route(Vec2 start, double heading) : start_(start), heading0_(heading) {}

Pose Route::end_pose() const {
  if (pieces_.empty()) return {start_, heading0_};
  return pose_at(length_);
}

Route& Route::line(double length) {
  const Pose end = end_pose();
  pieces_.push_back({end.position, end.heading, length_, length, 0.0});
  length_ += length;
  return *this;
}

Route& Route::arc(double radius, double sweep_radians, bool left) {
  const Pose end = end_pose();
  const double curvature = (left ? 1.0 : -1.0) / radius;
  const double length = radius * sweep_radians;
  pieces_.push_back({end.position, end.heading, length_, length, curvature});
  length_ += length;
  return *this;
}

Pose Route::pose_at(double s) const {
  if (pieces_.empty()) return {start_ + s * unit(heading0_), heading0_};
  if (s <= 0.0) {
    const Piece& p = pieces_.front();
    return {p.start + s * unit(p.heading), p.heading};
  }
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), s,
                             [](double v, const Piece& p) { return v < p.s0; });
  const Piece& p = *std::prev(it);
  double t = s - p.s0;
  if (t > p.length && it == pieces_.end()) {
    // Past the end: straight extrapolation from the final pose.
    const double heading = p.heading + p.curvature * p.length;
    Vec2 end = p.start;
    if (p.curvature == 0.0) {
      end = p.start + p.length * unit(p.heading);
    } else {
      end = p.start + (1.0 / p.curvature) * Vec2{std::sin(heading) - std::sin(p.heading),
                                                 std::cos(p.heading) - std::cos(heading)};
    }
    return {end + (t - p.length) * unit(heading), heading};
  }
  if (p.curvature == 0.0) return {p.start + t * unit(p.heading), p.heading};
  const double heading = p.heading + p.curvature * t;
  const Vec2 offset = (1.0 / p.curvature) * Vec2{std::sin(heading) - std::sin(p.heading),
                                                 std::cos(p.heading) - std::cos(heading)};
  return {p.start + offset, heading};
}

std::vector<double> Route::breakpoints() const {
  std::vector<double> out;
  for (const Piece& p : pieces_) out.push_back(p.s0);
  out.push_back(length_);
  return out;
}

}  // namespace faildist::sim
