#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "faildist/baselines/baselines.hpp"
#include "faildist/core/errors.hpp"
#include "faildist/harness/experiment.hpp"
#include "faildist/harness/metrics.hpp"
#include "faildist/harness/render.hpp"
#include "faildist/harness/report.hpp"
#include "faildist/harness/trajectory_io.hpp"

using namespace faildist;
using namespace faildist::harness;

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("faildist_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<SceneTrajectory> sample_trajectories(const sim::Simulator& s, std::size_t n, std::uint64_t seed) {
  return baselines::uniform_is_rollouts(s, n, [&](Rng& r) { return s.initial_scene(r); }, baselines::Streams{seed});
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

ExperimentConfig small_experiment() {
  auto cfg = default_experiment("two_car");
  cfg.methods = {"mc", "uniform-is", "cem"};
  cfg.eval.rate_rollouts = 200;
  cfg.eval.failures = 5;
  cfg.eval.batch = 200;
  cfg.eval.max_rollouts = 2000;
  cfg.cem.n_iters = 3;
  return cfg;
}

}  // namespace

TEST(Metrics, FailureRateStandardDeviation) {
  MetricsReport r;
  set_failure_rate(r, 25, 1000);
  EXPECT_DOUBLE_EQ(r.failure_rate, 0.025);
  EXPECT_DOUBLE_EQ(r.failure_rate_std, std::sqrt(0.025 * 0.975 / 1000.0));
  set_failure_rate(r, 0, 10);
  EXPECT_EQ(r.failure_rate_std, 0.0);
  EXPECT_THROW(set_failure_rate(r, 11, 10), ContractViolation);
  EXPECT_THROW(set_failure_rate(r, 0, 0), ContractViolation);
}

TEST(Metrics, LogLikelihoodPerStepAndTotal) {
  std::vector<Trajectory<int>> fails(2);
  fails[0].disturbances = {0, 0};
  fails[0].logp_model = {-1.0, -3.0};
  fails[1].disturbances = {0, 0, 0, 0};
  fails[1].logp_model = {-1.0, -1.0, -1.0, -1.0};
  for (auto& t : fails) t.ended_in_failure = true;
  MetricsReport r;
  set_log_likelihood<int>(r, fails, 3);
  EXPECT_DOUBLE_EQ(r.loglik_step, -1.5);
  // sample sd sqrt(0.5), over sqrt(2)
  EXPECT_DOUBLE_EQ(r.loglik_step_se, 0.5);
  EXPECT_DOUBLE_EQ(r.loglik_total, -4.0);
  EXPECT_EQ(r.n_failures_used, 2u);
  EXPECT_TRUE(r.insufficient_failures);
  fails[1].ended_in_failure = false;
  EXPECT_THROW(set_log_likelihood<int>(r, fails, 3), ContractViolation);
}

TEST(Metrics, EvaluateCollectsFailuresPastTheRateBatch) {
  const sim::Simulator s(sim::default_scenario("two_car"));
  EvalOptions opt;
  opt.rate_rollouts = 100;
  opt.failures = 20;
  opt.batch = 100;
  opt.max_rollouts = 5000;
  const auto ev = evaluate(s, [&](Rng& r) { return s.initial_scene(r); }, baselines::uniform_proposal(s), "u",
                           baselines::Streams{1, 2, 3}, opt, 4);
  EXPECT_EQ(ev.report.n_rollouts, 100u);
  EXPECT_EQ(ev.failures.size(), 20u);
  EXPECT_FALSE(ev.report.insufficient_failures);
  EXPECT_GE(ev.report.failures_seen, 20u);
  EXPECT_EQ(ev.report.loglik_rollouts % 100, 0u);
  EXPECT_EQ(ev.first.size(), 4u);
  for (const auto& t : ev.failures) EXPECT_TRUE(t.ended_in_failure);
  opt.max_rollouts = 50;
  EXPECT_THROW(evaluate(s, [&](Rng& r) { return s.initial_scene(r); }, baselines::uniform_proposal(s), "u",
                        baselines::Streams{}, opt),
               ConfigError);
}

TEST(TrajectoryIo, EmptyExportIsHeaderOnly) {
  std::ostringstream out;
  write_trajectories(out, {});
  const auto text = out.str();
  EXPECT_EQ(count(text, "\n"), 1u);
  const auto header = nlohmann::json::parse(text);
  EXPECT_EQ(header["trajectories"], 0);
  std::istringstream in(text);
  EXPECT_TRUE(read_trajectories(in).empty());
}

TEST(TrajectoryIo, RoundTripIsExact) {
  const sim::Simulator s(sim::default_scenario("five_car"));
  const auto trajs = sample_trajectories(s, 100, 11);
  std::stringstream io;
  write_trajectories(io, trajs);
  EXPECT_EQ(read_trajectories(io), trajs);
}

TEST(TrajectoryIo, FailureRecordIsLast) {
  const sim::Simulator s(sim::default_scenario("two_car"));
  std::vector<SceneTrajectory> fails;
  for (auto& t : sample_trajectories(s, 300, 12)) {
    if (t.ended_in_failure) fails.push_back(std::move(t));
  }
  ASSERT_FALSE(fails.empty());
  const auto dir = scratch_dir("io");
  export_trajectories(fails, dir / "f.jsonl");
  std::ifstream in(dir / "f.jsonl");
  std::string line;
  std::getline(in, line);
  nlohmann::json last;
  std::size_t records = 0;
  while (std::getline(in, line)) {
    const auto rec = nlohmann::json::parse(line);
    if (rec["traj"] == 0) {
      last = rec;
      ++records;
    }
  }
  EXPECT_EQ(records, fails[0].states.size());
  EXPECT_TRUE(last["failure"].get<bool>());
  EXPECT_TRUE(last["terminal"].get<bool>());
  EXPECT_EQ(parse_trajectories(dir / "f.jsonl"), fails);
  fs::remove_all(dir);
}

TEST(TrajectoryIo, MalformedInputThrows) {
  for (const std::string text : {std::string{}, std::string{"not json\n"},
                                 std::string{"{\"format\":\"other\",\"version\":1,\"trajectories\":0}\n"},
                                 std::string{"{\"format\":\"faildist-trajectories\",\"version\":1,\"trajectories\":1}\n"}}) {
    std::istringstream in(text);
    EXPECT_THROW(read_trajectories(in), FormatError) << text;
  }
  EXPECT_THROW(parse_trajectories("/nonexistent/x.jsonl"), FormatError);
}

TEST(Render, DrawsEveryVehicle) {
  const sim::Simulator s(sim::default_scenario("five_car"));
  Rng rng = make_stream(13);
  auto scene = s.initial_scene(rng);
  const auto svg = render_scene_svg(s, scene);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_EQ(count(svg, "data-vehicle="), 5u);
  EXPECT_EQ(count(svg, "#2f6fd0"), 1u);
  EXPECT_EQ(count(svg, "#d0452f"), 4u);
  EXPECT_EQ(count(svg, "COLLISION"), 0u);
  std::size_t blinkers = scene.ego.blinker ? 1 : 0;
  for (const auto& a : scene.adversaries) blinkers += a.blinker ? 1 : 0;
  EXPECT_EQ(count(svg, "class=\"blinker\""), blinkers);
  scene.ego.pos += 5.0;
  EXPECT_NE(render_scene_svg(s, scene), svg);
}

TEST(Render, CollisionFrameIsMarked) {
  const sim::Simulator s(sim::default_scenario("two_car"));
  for (const auto& t : sample_trajectories(s, 300, 14)) {
    if (!t.ended_in_failure) continue;
    const auto svg = render_scene_svg(s, t.states.back());
    EXPECT_EQ(count(svg, "COLLISION"), 1u);
    EXPECT_NE(svg.find("stroke=\"#000"), std::string::npos);
    const auto dir = scratch_dir("render");
    EXPECT_EQ(render_trajectory(s, t, dir), t.states.size());
    EXPECT_TRUE(fs::exists(dir / "frame_0000.svg"));
    fs::remove_all(dir);
    EXPECT_EQ(render_trajectory(s, t, dir, 0), 1u);
    EXPECT_THROW(render_trajectory(s, t, dir, t.states.size()), ContractViolation);
    fs::remove_all(dir);
    return;
  }
  FAIL() << "no failure sampled";
}

TEST(Report, CsvAndTable) {
  MetricsReport a;
  a.method = "mc";
  a.seed = 3;
  set_failure_rate(a, 4, 1000);
  MetricsReport b = a;
  b.method = "uniform-is";
  b.loglik_step = -5.25;
  const std::vector<MetricsReport> reports{a, b};
  const auto csv = results_csv(reports);
  EXPECT_EQ(count(csv, "\n"), 3u);
  EXPECT_EQ(csv.rfind("method,seed,n_rollouts", 0), 0u);
  EXPECT_NE(csv.find("\nuniform-is,3,1000,4,0.004"), std::string::npos);
  const auto table = results_table(reports, "title");
  EXPECT_NE(table.find("title"), std::string::npos);
  EXPECT_NE(table.find("uniform-is"), std::string::npos);
  const std::vector<Timing> timings{{"solve", 1.5}};
  EXPECT_EQ(count(timings_csv(timings), "\n"), 2u);
}

TEST(Experiment, JsonParsing) {
  const auto j = nlohmann::json::parse(R"({
    "scenario": {"name": "five_car"}, "seed": 7, "methods": ["mc", "a2t"],
    "evaluation": {"rate_rollouts": 500, "failures": 50},
    "a2t": {"iterations": 20, "learning_rate": 0.5}
  })");
  const auto cfg = experiment_from_json(j);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.scenario.adversaries.size(), 4u);
  EXPECT_EQ(cfg.methods, (std::vector<std::string>{"mc", "a2t"}));
  EXPECT_EQ(cfg.eval.rate_rollouts, 500u);
  EXPECT_EQ(cfg.eval.failures, 50u);
  EXPECT_EQ(cfg.train.n_iter, 20u);
  EXPECT_EQ(cfg.train.learning_rate, 0.5);

  for (const char* bad : {R"({"scenario": {"name": "two_car"}, "sed": 1})",
                          R"({"scenario": {"name": "two_car"}, "methods": ["mcmc"]})",
                          R"({"scenario": {"name": "five_car"}, "methods": ["dp"]})",
                          R"({"scenario": {"name": "two_car"}, "a2t": {"lr": 1}})",
                          R"({"scenario": {"name": "two_car"}, "evaluation": {"rate_rollouts": 0}})"}) {
    EXPECT_THROW(experiment_from_json(nlohmann::json::parse(bad)), ConfigError) << bad;
  }
}

TEST(Experiment, ShippedConfigsLoad) {
  const fs::path root = FAILDIST_SOURCE_DIR;
  EXPECT_EQ(load_experiment(root / "configs/two_car.json").scenario.adversaries.size(), 1u);
  const auto five = load_experiment(root / "configs/five_car.json");
  EXPECT_EQ(five.scenario.adversaries.size(), 4u);
  EXPECT_EQ(five.train.n_iter, default_experiment("five_car").train.n_iter);
  EXPECT_THROW(load_experiment("/nonexistent.json"), ConfigError);
}

TEST(Experiment, MethodStreamsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (const char* m : {"mc", "uniform-is", "cem", "dp", "a2t"}) {
    EXPECT_TRUE(is_method(m));
    seen.insert(method_stream(m));
  }
  EXPECT_EQ(seen.size(), 5u);
  EXPECT_FALSE(is_method("dqn"));
}

TEST(Experiment, RunMethodIsDeterministic) {
  const auto cfg = small_experiment();
  for (const auto& m : cfg.methods) {
    const auto a = run_method(cfg, m, {}, 1);
    const auto b = run_method(cfg, m, {}, 2);
    EXPECT_EQ(a.report, b.report) << m;
    EXPECT_EQ(a.failures, b.failures) << m;
  }
}

TEST(Experiment, MethodsShareStartScenes) {
  const auto cfg = small_experiment();
  const auto mc = run_method(cfg, "mc", {}, 1, 5);
  const auto uis = run_method(cfg, "uniform-is", {}, 1, 5);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(mc.first[i].states.front(), uis.first[i].states.front());
}
