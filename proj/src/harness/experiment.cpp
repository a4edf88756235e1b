#include "faildist/harness/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "faildist/core/errors.hpp"
#include "faildist/dp/pair.hpp"
#include "faildist/policy/policy.hpp"
#include "faildist/sim/simulator.hpp"

namespace faildist::harness {

using nlohmann::json;

namespace {

const std::vector<std::string> kMethods{"mc", "uniform-is", "cem", "dp", "a2t"};

constexpr std::uint64_t kA2TInitStream = 0x6132;

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

bool is_method(const std::string& name) {
  return std::find(kMethods.begin(), kMethods.end(), name) != kMethods.end();
}

std::uint64_t method_stream(const std::string& name) {
  const auto it = std::find(kMethods.begin(), kMethods.end(), name);
  if (it == kMethods.end()) throw ConfigError("unknown method '" + name + "'");
  return 0x6d00 + static_cast<std::uint64_t>(it - kMethods.begin());
}

void ExperimentConfig::validate() const {
  scenario.validate();
  eval.validate();
  train.validate();
  try {
    cem.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
  if (methods.empty()) throw ConfigError("experiment: no methods");
  for (const auto& m : methods) {
    if (!is_method(m)) throw ConfigError("unknown method '" + m + "' (expected mc|uniform-is|cem|dp|a2t)");
    if (m == "dp" && scenario.adversaries.size() != 1) {
      throw ConfigError("method dp needs a single-adversary scenario; use a2t");
    }
  }
  if (dp_knots < 2) throw ConfigError("dp: at least 2 knots per axis");
  if (!(dp_tol > 0.0) || dp_max_sweeps == 0) throw ConfigError("dp: tol and max_sweeps must be positive");
  if (base_hidden == 0 || attention_hidden == 0) throw ConfigError("a2t: hidden sizes must be positive");
}

ExperimentConfig default_experiment(const std::string& scenario) {
  ExperimentConfig cfg;
  cfg.scenario = sim::default_scenario(scenario);
  if (scenario == "five_car") {
    cfg.methods = {"mc", "uniform-is", "cem", "a2t"};
    cfg.train.n_iter = 200;
    cfg.train.learning_rate = 1.0;
  }
  return cfg;
}

ExperimentConfig experiment_from_json(const json& j) {
  check_keys(j, "experiment", {"scenario", "seed", "methods", "evaluation", "dp", "cem", "a2t"});
  std::string name = "two_car";
  if (j.contains("scenario")) {
    const json& s = j.at("scenario");
    if (!s.is_object()) throw ConfigError("scenario: expected an object");
    if (s.contains("name")) name = s.at("name").get<std::string>();
  }
  ExperimentConfig cfg = default_experiment(name);
  if (j.contains("scenario")) cfg.scenario = sim::scenario_from_json(j.at("scenario"));
  read(j, "seed", cfg.seed);
  read(j, "methods", cfg.methods);
  if (j.contains("evaluation")) {
    const json& e = j.at("evaluation");
    check_keys(e, "evaluation", {"rate_rollouts", "failures", "max_rollouts", "batch"});
    read(e, "rate_rollouts", cfg.eval.rate_rollouts);
    read(e, "failures", cfg.eval.failures);
    read(e, "max_rollouts", cfg.eval.max_rollouts);
    read(e, "batch", cfg.eval.batch);
  }
  if (j.contains("dp")) {
    const json& d = j.at("dp");
    check_keys(d, "dp", {"knots", "tol", "max_sweeps"});
    read(d, "knots", cfg.dp_knots);
    read(d, "tol", cfg.dp_tol);
    read(d, "max_sweeps", cfg.dp_max_sweeps);
  }
  if (j.contains("cem")) {
    const json& c = j.at("cem");
    check_keys(c, "cem", {"n_per_iter", "n_iters", "elite_fraction", "smoothing", "p_floor"});
    read(c, "n_per_iter", cfg.cem.n_per_iter);
    read(c, "n_iters", cfg.cem.n_iters);
    read(c, "elite_fraction", cfg.cem.elite_fraction);
    read(c, "smoothing", cfg.cem.smoothing);
    read(c, "p_floor", cfg.cem.p_floor);
  }
  if (j.contains("a2t")) {
    const json& a = j.at("a2t");
    check_keys(a, "a2t", {"iterations", "samples", "learning_rate", "rollouts_per_batch", "base_hidden",
                          "attention_hidden", "value_epsilon"});
    read(a, "iterations", cfg.train.n_iter);
    read(a, "samples", cfg.train.n_samp);
    read(a, "learning_rate", cfg.train.learning_rate);
    read(a, "rollouts_per_batch", cfg.train.rollouts_per_batch);
    read(a, "base_hidden", cfg.base_hidden);
    read(a, "attention_hidden", cfg.attention_hidden);
    read(a, "value_epsilon", cfg.train.policy.value_epsilon);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return experiment_from_json(j);
}

std::filesystem::path grid_path(const std::filesystem::path& dir, std::size_t pair) {
  return dir / ("pair_" + std::to_string(pair) + ".fdvg");
}

std::filesystem::path checkpoint_path(const std::filesystem::path& dir) { return dir / "a2t.fdat"; }

namespace {

std::shared_ptr<const dp::ValueGrid> solve_pair(const ExperimentConfig& cfg, std::size_t i, std::size_t threads,
                                                const SweepLog& log) {
  dp::PairSubproblem sub(cfg.scenario, i);
  dp::ValueIterationOptions opt;
  opt.tol = cfg.dp_tol;
  opt.max_sweeps = cfg.dp_max_sweeps;
  opt.threads = threads;
  opt.pair_index = i;
  if (log) {
    opt.on_sweep = [&](const dp::SweepInfo& info, std::span<const double>) { log(i, info.sweep, info.residual); };
  }
  return std::make_shared<const dp::ValueGrid>(dp::value_iteration(sub, sub.default_grid(cfg.dp_knots), opt));
}

}  // namespace

std::vector<std::shared_ptr<const dp::ValueGrid>> solve_pairs(const ExperimentConfig& cfg, std::size_t threads,
                                                              const SweepLog& log) {
  std::vector<std::shared_ptr<const dp::ValueGrid>> out;
  for (std::size_t i = 0; i < cfg.scenario.adversaries.size(); ++i) out.push_back(solve_pair(cfg, i, threads, log));
  return out;
}

std::vector<std::shared_ptr<const dp::ValueGrid>> load_or_solve_pairs(const ExperimentConfig& cfg,
                                                                      const std::filesystem::path& dir,
                                                                      std::size_t threads) {
  std::vector<std::shared_ptr<const dp::ValueGrid>> out;
  for (std::size_t i = 0; i < cfg.scenario.adversaries.size(); ++i) {
    const auto path = grid_path(dir, i);
    const dp::GridSpec want = dp::PairSubproblem(cfg.scenario, i).default_grid(cfg.dp_knots);
    if (std::filesystem::exists(path)) {
      auto g = std::make_shared<const dp::ValueGrid>(dp::ValueGrid::load(path));
      if (g->spec() == want && g->pair_index() == i) {
        out.push_back(std::move(g));
        continue;
      }
    }
    auto g = solve_pair(cfg, i, threads, {});
    std::filesystem::create_directories(dir);
    g->save(path);
    out.push_back(std::move(g));
  }
  return out;
}

TrainResult train_a2t(const ExperimentConfig& cfg, std::vector<std::shared_ptr<const dp::ValueGrid>> grids,
                      std::size_t threads, const std::function<void(const a2t::IterationStats&)>& log) {
  const sim::Simulator sim(cfg.scenario);
  const a2t::SceneEncoder enc(sim, std::move(grids));
  a2t::A2TNetwork net({enc.num_features(), enc.num_solutions(), cfg.base_hidden, cfg.attention_hidden});
  Rng rng = make_stream(cfg.seed, kA2TInitStream);
  net.initialize(rng);
  a2t::TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  tc.threads = threads;
  auto history = a2t::mc_policy_eval(
      sim, net, enc, [&](Rng& r) { return sim.initial_scene(r); }, tc, log);
  return {a2t::Checkpoint{std::move(net), enc.scaling()}, std::move(history)};
}

Evaluation<sim::SceneState> run_method(const ExperimentConfig& cfg, const std::string& method,
                                       const Artifacts& artifacts, std::size_t threads, std::size_t keep_first) {
  cfg.validate();
  const sim::Simulator sim(cfg.scenario);
  const auto init = [&](Rng& r) { return sim.initial_scene(r); };
  const baselines::Streams streams{cfg.seed, kEvalInitialStream, method_stream(method), 0};
  EvalOptions eo = cfg.eval;
  eo.threads = threads;

  if (method == "mc") {
    return evaluate(sim, init, baselines::nominal_proposal(sim), method, streams, eo, keep_first);
  }
  if (method == "uniform-is") {
    return evaluate(sim, init, baselines::uniform_proposal(sim), method, streams, eo, keep_first);
  }
  if (method == "cem") {
    baselines::CemOptions co = cfg.cem;
    co.seed = cfg.seed;
    co.threads = threads;
    const auto fit = baselines::cem_optimize(sim, init, co);
    return evaluate(sim, init, fit.proposal, method, streams, eo, keep_first);
  }

  auto grids = artifacts.grids;
  if (grids.empty()) grids = solve_pairs(cfg, threads);
  if (grids.size() != cfg.scenario.adversaries.size()) {
    throw ConfigError("expected one value grid per adversary");
  }
  const policy::PolicyOptions popt = cfg.train.policy;
  if (method == "dp") {
    const dp::GridValueFunction vf(*grids.front());
    const auto proposal = [&](const sim::SceneState& s) { return policy::policy_distribution(sim, s, vf, popt); };
    return evaluate(sim, init, proposal, method, streams, eo, keep_first);
  }
  if (method == "a2t") {
    auto ckpt = artifacts.checkpoint;
    if (!ckpt) ckpt = std::make_shared<const a2t::Checkpoint>(train_a2t(cfg, grids, threads).checkpoint);
    const a2t::SceneEncoder enc(ckpt->scaling, grids);
    if (ckpt->net.shape().inputs != enc.num_features() || ckpt->net.shape().solutions != enc.num_solutions()) {
      throw ConfigError("checkpoint does not match the scenario");
    }
    const a2t::EncodedValueFunction<a2t::SceneEncoder> vf(ckpt->net, enc);
    const auto proposal = [&](const sim::SceneState& s) { return policy::policy_distribution(sim, s, vf, popt); };
    return evaluate(sim, init, proposal, method, streams, eo, keep_first);
  }
  throw ConfigError("unknown method '" + method + "'");
}

}  // namespace faildist::harness
