#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "faildist/core/model.hpp"
#include "faildist/sim/simulator.hpp"

namespace faildist::harness {

struct RenderOptions {
  double pixels_per_meter = 8.0;
  double margin = 5.0;  // m
  /// Clip the view to this many meters around the junction; 0 shows every route in full.
  double view_radius = 40.0;
};

/// SVG of one scene: road centre lines and lane edges, vehicle rectangles
/// (ego blue, adversaries red, black outline on collision) and an amber
/// marker on the turning side of every vehicle whose blinker is on.
std::string render_scene_svg(const sim::Simulator& sim, const sim::SceneState& scene,
                             const RenderOptions& opt = {});

/// Writes frame_NNNN.svg into dir for one state or, with no step, for every
/// state. Returns the number of frames written.
std::size_t render_trajectory(const sim::Simulator& sim, const Trajectory<sim::SceneState>& traj,
                              const std::filesystem::path& dir, std::optional<std::size_t> step = std::nullopt,
                              const RenderOptions& opt = {});

}  // namespace faildist::harness
