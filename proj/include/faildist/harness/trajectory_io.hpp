#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "faildist/core/model.hpp"
#include "faildist/sim/scene.hpp"

namespace faildist::harness {

using SceneTrajectory = Trajectory<sim::SceneState>;

/// Line-delimited JSON. The first line is a header; after it each trajectory
/// contributes one record per state: the state, the disturbance that led to
/// it with its model and sampler log-probabilities (null for the first), and
/// terminal/failure flags on the last record.
void write_trajectories(std::ostream& out, std::span<const SceneTrajectory> trajs);
std::vector<SceneTrajectory> read_trajectories(std::istream& in);

void export_trajectories(std::span<const SceneTrajectory> trajs, const std::filesystem::path& path);
std::vector<SceneTrajectory> parse_trajectories(const std::filesystem::path& path);

}  // namespace faildist::harness
