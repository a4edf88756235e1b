#include "faildist/harness/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "faildist/core/errors.hpp"

namespace faildist::harness {

namespace {

struct Box {
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();

  void add(sim::Vec2 p) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
};

std::vector<sim::Vec2> sample_route(const sim::Route& r, double step = 1.0) {
  std::vector<sim::Vec2> pts;
  const int n = std::max(1, static_cast<int>(std::ceil(r.length() / step)));
  for (int i = 0; i <= n; ++i) pts.push_back(r.pose_at(r.length() * i / n).position);
  return pts;
}

std::string polyline(const std::vector<sim::Vec2>& pts, const std::string& style) {
  std::string s = "<polyline fill=\"none\" " + style + " points=\"";
  for (const auto& p : pts) s += fmt::format("{:.2f},{:.2f} ", p.x, p.y);
  s.back() = '"';
  return s + "/>\n";
}

// +1 when the route bends left overall, -1 when it bends right, 0 when straight.
int turn_side(const sim::Route& r) {
  const double d = r.pose_at(r.length()).heading - r.pose_at(0.0).heading;
  const double wrapped = std::remainder(d, 2.0 * std::numbers::pi);
  if (std::abs(wrapped) < 1e-6) return 0;
  return wrapped > 0 ? 1 : -1;
}

}  // namespace

std::string render_scene_svg(const sim::Simulator& sim, const sim::SceneState& scene, const RenderOptions& opt) {
  const sim::RoadNetwork& road = sim.road();
  const double lane = road.config().lane_width;

  std::vector<std::vector<sim::Vec2>> routes;
  Box box;
  for (std::size_t r = 0; r < sim::kNumRoutes; ++r) {
    routes.push_back(sample_route(road.route(static_cast<sim::RouteId>(r))));
    for (const auto& p : routes.back()) box.add(p);
  }
  if (opt.view_radius > 0.0) {
    box.x0 = std::max(box.x0, -opt.view_radius);
    box.y0 = std::max(box.y0, -opt.view_radius);
    box.x1 = std::min(box.x1, opt.view_radius);
    box.y1 = std::min(box.y1, opt.view_radius);
  }
  box.x0 -= opt.margin;
  box.y0 -= opt.margin;
  box.x1 += opt.margin;
  box.y1 += opt.margin;
  const double w = box.x1 - box.x0, h = box.y1 - box.y0;

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "viewBox=\"{:.2f} {:.2f} {:.2f} {:.2f}\">\n",
      w * opt.pixels_per_meter, h * opt.pixels_per_meter, box.x0, -box.y1, w, h);
  svg += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"#f4f4ef\"/>\n",
                     box.x0, -box.y1, w, h);
  // World y points up; SVG y points down.
  svg += "<g transform=\"scale(1,-1)\">\n";
  for (const auto& pts : routes) {
    svg += polyline(pts, fmt::format("stroke=\"#c8c8c0\" stroke-width=\"{:.2f}\" stroke-linecap=\"butt\"", lane));
  }
  for (const auto& pts : routes) {
    svg += polyline(pts, "stroke=\"#ffffff\" stroke-width=\"0.15\" stroke-dasharray=\"1.5,1.5\"");
  }

  const bool failed = sim.is_failure(scene);
  for (std::size_t i = 0; i < scene.num_vehicles(); ++i) {
    const sim::VehicleState& v = scene.vehicle(i);
    const sim::OrientedRect rect = road.footprint(v);
    const auto c = rect.corners();
    const char* fill = i == 0 ? "#2f6fd0" : "#d0452f";
    const char* stroke = failed ? "#000000" : "none";
    svg += fmt::format(
        "<polygon data-vehicle=\"{}\" fill=\"{}\" fill-opacity=\"0.85\" stroke=\"{}\" stroke-width=\"0.3\" "
        "points=\"{:.3f},{:.3f} {:.3f},{:.3f} {:.3f},{:.3f} {:.3f},{:.3f}\"/>\n",
        i, fill, stroke, c[0].x, c[0].y, c[1].x, c[1].y, c[2].x, c[2].y, c[3].x, c[3].y);
    const int side = turn_side(road.route(v.route));
    if (v.blinker && side != 0) {
      const sim::Vec2 fwd = sim::unit(rect.heading);
      const sim::Vec2 left{-fwd.y, fwd.x};
      const sim::Vec2 p = rect.center + (rect.half_length * 0.8) * fwd + (side * rect.half_width) * left;
      svg += fmt::format("<circle class=\"blinker\" cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"0.45\" fill=\"#f2a900\"/>\n",
                         p.x, p.y);
    }
  }
  svg += "</g>\n";
  svg += fmt::format(
      "<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"monospace\" font-size=\"2.5\">t = {:.2f} s{}</text>\n",
      box.x0 + 1.0, -box.y1 + 3.0, scene.step_index * scene.dt, failed ? "  COLLISION" : "");
  svg += "</svg>\n";
  return svg;
}

std::size_t render_trajectory(const sim::Simulator& sim, const Trajectory<sim::SceneState>& traj,
                              const std::filesystem::path& dir, std::optional<std::size_t> step,
                              const RenderOptions& opt) {
  if (step && *step >= traj.states.size()) throw ContractViolation("render_trajectory: step out of range");
  std::filesystem::create_directories(dir);
  const std::size_t first = step ? *step : 0;
  const std::size_t last = step ? *step + 1 : traj.states.size();
  for (std::size_t j = first; j < last; ++j) {
    std::ofstream out(dir / fmt::format("frame_{:04d}.svg", j), std::ios::binary);
    if (!out) throw FormatError("cannot write frames to " + dir.string());
    out << render_scene_svg(sim, traj.states[j], opt);
  }
  return last - first;
}

}  // namespace faildist::harness
