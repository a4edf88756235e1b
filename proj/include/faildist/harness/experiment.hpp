#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "faildist/a2t/a2t.hpp"
#include "faildist/a2t/train.hpp"
#include "faildist/baselines/baselines.hpp"
#include "faildist/dp/grid.hpp"
#include "faildist/harness/metrics.hpp"
#include "faildist/sim/config.hpp"

namespace faildist::harness {

/// Everything one run of the method comparison needs.
struct ExperimentConfig {
  sim::ScenarioConfig scenario;
  std::vector<std::string> methods{"mc", "uniform-is", "cem", "dp"};
  std::uint64_t seed = 1;
  EvalOptions eval;
  std::size_t dp_knots = 15;
  double dp_tol = 1e-6;
  std::size_t dp_max_sweeps = 500;
  baselines::CemOptions cem;
  a2t::TrainConfig train;
  std::size_t base_hidden = 32;
  std::size_t attention_hidden = 32;

  void validate() const;
};

/// Known method names: mc, uniform-is, cem, dp, a2t.
bool is_method(const std::string& name);
std::uint64_t method_stream(const std::string& name);

ExperimentConfig experiment_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment(const std::filesystem::path& path);
/// Defaults for "two_car" and "five_car".
ExperimentConfig default_experiment(const std::string& scenario);

/// Files for the artifacts the DP and A2T methods need.
std::filesystem::path grid_path(const std::filesystem::path& dir, std::size_t pair);
std::filesystem::path checkpoint_path(const std::filesystem::path& dir);

using SweepLog = std::function<void(std::size_t pair, std::size_t sweep, double residual)>;

/// Solves every pair subproblem with the configured grid.
std::vector<std::shared_ptr<const dp::ValueGrid>> solve_pairs(const ExperimentConfig& cfg, std::size_t threads,
                                                              const SweepLog& log = {});
/// Loads pair grids from dir; solves (and saves) any that are missing.
std::vector<std::shared_ptr<const dp::ValueGrid>> load_or_solve_pairs(const ExperimentConfig& cfg,
                                                                      const std::filesystem::path& dir,
                                                                      std::size_t threads);

struct TrainResult {
  a2t::Checkpoint checkpoint;
  std::vector<a2t::IterationStats> history;
};

TrainResult train_a2t(const ExperimentConfig& cfg, std::vector<std::shared_ptr<const dp::ValueGrid>> grids,
                      std::size_t threads, const std::function<void(const a2t::IterationStats&)>& log = {});

/// Artifacts handed to run_method. Empty members are built on demand.
struct Artifacts {
  std::vector<std::shared_ptr<const dp::ValueGrid>> grids;
  std::shared_ptr<const a2t::Checkpoint> checkpoint;
};

inline constexpr std::uint64_t kEvalInitialStream = 0x696e6974;

/// Evaluates one method. Every method sees the same sequence of start scenes.
Evaluation<sim::SceneState> run_method(const ExperimentConfig& cfg, const std::string& method,
                                       const Artifacts& artifacts, std::size_t threads, std::size_t keep_first = 0);

}  // namespace faildist::harness
