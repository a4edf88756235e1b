// faildist: solve pair grids, train the A2T combiner, run baselines and the
// full method comparison, and render scenes.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "faildist/core/errors.hpp"
#include "faildist/harness/experiment.hpp"
#include "faildist/harness/render.hpp"
#include "faildist/harness/report.hpp"
#include "faildist/harness/trajectory_io.hpp"
#include "faildist/sim/simulator.hpp"

namespace fs = std::filesystem;
using namespace faildist;

namespace {

struct Globals {
  std::string config;
  std::string scenario = "two_car";
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::size_t threads = 1;
};

harness::ExperimentConfig load(const Globals& g) {
  auto cfg = g.config.empty() ? harness::default_experiment(g.scenario) : harness::load_experiment(g.config);
  if (g.seed) cfg.seed = *g.seed;
  cfg.validate();
  return cfg;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string train_log_csv(const std::vector<a2t::IterationStats>& history) {
  std::string out = "iteration,loss,failure_fraction,mean_abs_grad,rollouts,samples\n";
  for (const auto& s : history) {
    out += fmt::format("{},{:.9g},{:.6g},{:.6g},{},{}\n", s.iteration, s.loss, s.failure_fraction, s.mean_abs_grad,
                       s.rollouts, s.samples);
  }
  return out;
}

std::vector<std::shared_ptr<const dp::ValueGrid>> grids_for(const harness::ExperimentConfig& cfg,
                                                            const std::string& grid_dir, const Globals& g) {
  return harness::load_or_solve_pairs(cfg, grid_dir.empty() ? fs::path(g.out_dir) : fs::path(grid_dir), g.threads);
}

int cmd_solve(const Globals& g) {
  const auto cfg = load(g);
  std::string log = "pair,sweep,residual\n";
  const auto t0 = std::chrono::steady_clock::now();
  const auto grids = harness::solve_pairs(cfg, g.threads, [&](std::size_t pair, std::size_t sweep, double res) {
    log += fmt::format("{},{},{:.6g}\n", pair, sweep, res);
  });
  for (const auto& grid : grids) {
    grid->save(harness::grid_path(g.out_dir, grid->pair_index()));
    std::cout << fmt::format("pair {}: {} points, {} sweeps, residual {:.3g}{}\n", grid->pair_index(),
                             grid->spec().size(), grid->sweeps, grid->residual,
                             grid->converged ? "" : " (not converged)");
  }
  harness::write_text(fs::path(g.out_dir) / "solve_log.csv", log);
  const harness::Timing t{"solve", seconds_since(t0)};
  harness::write_text(fs::path(g.out_dir) / "solve_timings.csv", harness::timings_csv({&t, 1}));
  return 0;
}

struct TrainFlags {
  std::optional<std::size_t> iters, samples;
  std::optional<double> lr;
  std::string checkpoint_out;
  std::string grids;
};

int cmd_train(const Globals& g, const TrainFlags& f) {
  auto cfg = load(g);
  if (f.iters) cfg.train.n_iter = *f.iters;
  if (f.samples) cfg.train.n_samp = *f.samples;
  if (f.lr) cfg.train.learning_rate = *f.lr;
  cfg.validate();
  auto grids = grids_for(cfg, f.grids, g);
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = harness::train_a2t(cfg, grids, g.threads, [&](const a2t::IterationStats& s) {
    if (s.iteration % 10 == 0 || s.iteration + 1 == cfg.train.n_iter) {
      std::cout << fmt::format("iter {:5d}  loss {:.4g}  failure fraction {:.3f}\n", s.iteration, s.loss,
                               s.failure_fraction);
    }
  });
  const fs::path out = f.checkpoint_out.empty() ? harness::checkpoint_path(g.out_dir) : fs::path(f.checkpoint_out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  res.checkpoint.save(out);
  harness::write_text(fs::path(g.out_dir) / "train_log.csv", train_log_csv(res.history));
  const harness::Timing t{"train", seconds_since(t0)};
  harness::write_text(fs::path(g.out_dir) / "train_timings.csv", harness::timings_csv({&t, 1}));
  std::cout << "checkpoint written to " << out.string() << "\n";
  return 0;
}

void write_method_outputs(const fs::path& dir, const harness::Evaluation<sim::SceneState>& ev) {
  const auto& m = ev.report.method;
  harness::export_trajectories(ev.failures, dir / ("failures_" + m + ".jsonl"));
  harness::export_trajectories(ev.first, dir / ("rollouts_" + m + ".jsonl"));
}

int cmd_baseline(const Globals& g, const std::string& method) {
  const auto cfg = load(g);
  const auto t0 = std::chrono::steady_clock::now();
  const auto ev = harness::run_method(cfg, method, {}, g.threads, 10);
  const harness::Timing t{method, seconds_since(t0)};
  const fs::path dir = g.out_dir;
  harness::write_text(dir / ("metrics_" + method + ".csv"), harness::results_csv({&ev.report, 1}));
  const std::string table = harness::results_table({&ev.report, 1}, cfg.scenario.name);
  harness::write_text(dir / ("metrics_" + method + ".txt"), table);
  harness::write_text(dir / ("timings_" + method + ".csv"), harness::timings_csv({&t, 1}));
  write_method_outputs(dir, ev);
  std::cout << table;
  return 0;
}

struct EvaluateFlags {
  std::vector<std::string> methods;
  std::string grids;
  std::string checkpoint;
};

int cmd_evaluate(const Globals& g, const EvaluateFlags& f) {
  auto cfg = load(g);
  if (!f.methods.empty()) cfg.methods = f.methods;
  cfg.validate();
  const fs::path dir = g.out_dir;
  std::vector<harness::MetricsReport> reports;
  std::vector<harness::Timing> timings;
  harness::Artifacts art;

  for (const auto& method : cfg.methods) {
    if ((method == "dp" || method == "a2t") && art.grids.empty()) {
      const auto t0 = std::chrono::steady_clock::now();
      art.grids = grids_for(cfg, f.grids, g);
      timings.push_back({"solve", seconds_since(t0)});
    }
    if (method == "a2t" && !art.checkpoint) {
      const fs::path ck = f.checkpoint.empty() ? harness::checkpoint_path(dir) : fs::path(f.checkpoint);
      if (fs::exists(ck)) {
        art.checkpoint = std::make_shared<const a2t::Checkpoint>(a2t::Checkpoint::load(ck));
      } else {
        const auto t0 = std::chrono::steady_clock::now();
        auto res = harness::train_a2t(cfg, art.grids, g.threads);
        timings.push_back({"train", seconds_since(t0)});
        fs::create_directories(ck.parent_path().empty() ? fs::path(".") : ck.parent_path());
        res.checkpoint.save(ck);
        harness::write_text(dir / "train_log.csv", train_log_csv(res.history));
        art.checkpoint = std::make_shared<const a2t::Checkpoint>(std::move(res.checkpoint));
      }
    }
    const auto t0 = std::chrono::steady_clock::now();
    auto ev = harness::run_method(cfg, method, art, g.threads, 10);
    timings.push_back({method, seconds_since(t0)});
    std::cout << fmt::format("{:<12} rate {:.4f}  loglik/step {:.3f}  ({} failures)\n", method,
                             ev.report.failure_rate, ev.report.loglik_step, ev.report.n_failures_used);
    write_method_outputs(dir, ev);
    reports.push_back(std::move(ev.report));
  }
  const std::string table = harness::results_table(reports, cfg.scenario.name);
  harness::write_text(dir / "results.csv", harness::results_csv(reports));
  harness::write_text(dir / "results.txt", table);
  harness::write_text(dir / "timings.csv", harness::timings_csv(timings));
  std::cout << "\n" << table;
  return 0;
}

struct RenderFlags {
  std::string trajectories;
  std::size_t index = 0;
  std::optional<std::size_t> step;
};

int cmd_render(const Globals& g, const RenderFlags& f) {
  const auto cfg = load(g);
  const sim::Simulator sim(cfg.scenario);
  const fs::path dir = fs::path(g.out_dir) / "frames";
  harness::SceneTrajectory traj;
  if (f.trajectories.empty()) {
    Rng rng = make_stream(cfg.seed, harness::kEvalInitialStream, 0, f.index);
    traj.states.push_back(sim.initial_scene(rng));
  } else {
    const auto all = harness::parse_trajectories(f.trajectories);
    if (f.index >= all.size()) {
      throw ConfigError(fmt::format("trajectory index {} out of range ({} in file)", f.index, all.size()));
    }
    traj = all[f.index];
  }
  const std::size_t n = harness::render_trajectory(sim, traj, dir, f.step);
  std::cout << fmt::format("{} frame(s) written to {}\n", n, dir.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Find likely failures of a driving policy at a T-junction"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--scenario", g.scenario, "Built-in scenario when no config is given")
      ->check(CLI::IsMember({"two_car", "five_car"}));
  auto* seed_opt = app.add_option("--seed", seed, "Master seed");
  app.add_option("--out-dir", g.out_dir, "Output directory");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* solve = app.add_subcommand("solve", "Solve the pair subproblems by value iteration");

  TrainFlags tf;
  auto* train = app.add_subcommand("train", "Train the A2T combiner by Monte Carlo policy evaluation");
  train->add_option("--iters", tf.iters, "Training iterations");
  train->add_option("--samples", tf.samples, "State visits per iteration");
  train->add_option("--lr", tf.lr, "Learning rate");
  train->add_option("--checkpoint-out", tf.checkpoint_out, "Checkpoint path (default <out-dir>/a2t.fdat)");
  train->add_option("--grids", tf.grids, "Directory with pair grids (default <out-dir>)");

  std::string method;
  auto* baseline = app.add_subcommand("baseline", "Evaluate one baseline sampler");
  baseline->add_option("--method", method, "mc | uniform-is | cem")
      ->required()
      ->check(CLI::IsMember({"mc", "uniform-is", "cem"}));

  EvaluateFlags ef;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate every configured method and write the results table");
  evaluate->add_option("--methods", ef.methods, "Override the configured method list");
  evaluate->add_option("--grids", ef.grids, "Directory with pair grids (default <out-dir>)");
  evaluate->add_option("--checkpoint", ef.checkpoint, "A2T checkpoint (default <out-dir>/a2t.fdat)");

  RenderFlags rf;
  auto* render = app.add_subcommand("render", "Write SVG frames of a trajectory or an initial scene");
  render->add_option("--trajectories", rf.trajectories, "Trajectory file (.jsonl)")->check(CLI::ExistingFile);
  render->add_option("--index", rf.index, "Trajectory index in the file, or initial-scene index");
  render->add_option("--step", rf.step, "Render only this state");

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed;

  try {
    if (*solve) return cmd_solve(g);
    if (*train) return cmd_train(g, tf);
    if (*baseline) return cmd_baseline(g, method);
    if (*evaluate) return cmd_evaluate(g, ef);
    if (*render) return cmd_render(g, rf);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
