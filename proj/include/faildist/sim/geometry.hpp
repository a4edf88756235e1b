#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace faildist::sim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double k, Vec2 a) { return {k * a.x, k * a.y}; }
  friend double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
  friend double norm(Vec2 a) { return std::hypot(a.x, a.y); }
  bool operator==(const Vec2&) const = default;
};

inline Vec2 unit(double heading) { return {std::cos(heading), std::sin(heading)}; }

struct Pose {
  Vec2 position;
  double heading = 0.0;  // radians, counter-clockwise from +x
};

struct OrientedRect {
  Vec2 center;
  double heading = 0.0;
  double half_length = 0.0;
  double half_width = 0.0;

  std::array<Vec2, 4> corners() const;
};

/// Separating-axis test; touching edges count as overlap.
bool overlaps(const OrientedRect& a, const OrientedRect& b);

/// Euclidean distance between two rectangles, 0 when they overlap.
double separation(const OrientedRect& a, const OrientedRect& b);

/// Arclength-parameterized path made of straight and circular pieces. Queries
/// outside [0, length] extrapolate along the first/last heading.
class Route {
 public:
  Route() = default;
  Route(Vec2 start, double heading);

  Route& line(double length);
  /// Circular arc; positive curvature turns left (counter-clockwise).
  Route& arc(double radius, double sweep_radians, bool left);

  Pose pose_at(double s) const;
  double length() const { return length_; }
  /// Arclength at which each piece begins, plus the total length at the end.
  std::vector<double> breakpoints() const;

 private:
  struct Piece {
    Vec2 start;
    double heading = 0.0;
    double s0 = 0.0;
    double length = 0.0;
    double curvature = 0.0;  // 0 for straight pieces
  };

  Pose end_pose() const;

  std::vector<Piece> pieces_;
  Vec2 start_;
  double heading0_ = 0.0;
  double length_ = 0.0;
};

}  // namespace faildist::sim
