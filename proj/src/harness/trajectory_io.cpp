#include "faildist/harness/trajectory_io.hpp"

#include <fstream>
#include <string>

#include <json.hpp>

#include "faildist/core/errors.hpp"
#include "faildist/sim/disturbance.hpp"

namespace faildist::harness {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "faildist-trajectories";
constexpr int kVersion = 1;

json vehicle_json(const sim::VehicleState& v) {
  return {{"route", sim::to_string(v.route)}, {"pos", v.pos},       {"vel", v.vel},
          {"blinker", v.blinker},            {"intent", v.intent_turn}, {"half_length", v.half_length},
          {"half_width", v.half_width}};
}

sim::VehicleState vehicle_from(const json& j) {
  sim::VehicleState v;
  v.route = sim::route_from_string(j.at("route").get<std::string>());
  v.pos = j.at("pos").get<double>();
  v.vel = j.at("vel").get<double>();
  v.blinker = j.at("blinker").get<bool>();
  v.intent_turn = j.at("intent").get<bool>();
  v.half_length = j.at("half_length").get<double>();
  v.half_width = j.at("half_width").get<double>();
  return v;
}

json record(std::size_t traj, std::size_t j, const SceneTrajectory& t) {
  const sim::SceneState& s = t.states[j];
  json vehicles = json::array();
  vehicles.push_back(vehicle_json(s.ego));
  for (const auto& a : s.adversaries) vehicles.push_back(vehicle_json(a));
  json r = {{"traj", traj}, {"step", j}, {"step_index", s.step_index}, {"dt", s.dt}, {"vehicles", vehicles}};
  if (j == 0) {
    r["disturbance"] = nullptr;
    r["logp"] = nullptr;
    r["logq"] = nullptr;
  } else {
    const std::size_t x = t.disturbances[j - 1];
    const auto jd = sim::JointDisturbance::decode(x);
    r["disturbance"] = {{"index", x}, {"actor", jd.actor_index}, {"kind", sim::to_string(jd.kind)}};
    r["logp"] = t.logp_model[j - 1];
    r["logq"] = t.logp_sampler[j - 1];
  }
  const bool last = j + 1 == t.states.size();
  r["terminal"] = last;
  r["failure"] = last && t.ended_in_failure;
  return r;
}

}  // namespace

void write_trajectories(std::ostream& out, std::span<const SceneTrajectory> trajs) {
  out << json{{"format", kFormat}, {"version", kVersion}, {"trajectories", trajs.size()}}.dump() << '\n';
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const auto& t = trajs[i];
    if (t.states.size() != t.disturbances.size() + 1 || t.logp_model.size() != t.disturbances.size() ||
        t.logp_sampler.size() != t.disturbances.size()) {
      throw ContractViolation("write_trajectories: inconsistent trajectory");
    }
    for (std::size_t j = 0; j < t.states.size(); ++j) out << record(i, j, t).dump() << '\n';
  }
}

std::vector<SceneTrajectory> read_trajectories(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("trajectory file: missing header");
  std::size_t expected = 0;
  try {
    const json h = json::parse(line);
    if (h.at("format") != kFormat || h.at("version") != kVersion) {
      throw FormatError("trajectory file: unsupported format");
    }
    expected = h.at("trajectories").get<std::size_t>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("trajectory file: bad header: ") + e.what());
  }

  std::vector<SceneTrajectory> out;
  bool open = false;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json r = json::parse(line);
      const auto traj = r.at("traj").get<std::size_t>();
      const auto step = r.at("step").get<std::size_t>();
      if (step == 0) {
        if (open || traj != out.size()) throw FormatError("unexpected start of trajectory");
        out.emplace_back();
        open = true;
      } else if (!open || traj + 1 != out.size() || step != out.back().states.size()) {
        throw FormatError("records out of order");
      }
      SceneTrajectory& t = out.back();
      sim::SceneState s;
      s.step_index = r.at("step_index").get<int>();
      s.dt = r.at("dt").get<double>();
      const json& vs = r.at("vehicles");
      if (vs.empty()) throw FormatError("record without vehicles");
      s.ego = vehicle_from(vs.at(0));
      for (std::size_t k = 1; k < vs.size(); ++k) s.adversaries.push_back(vehicle_from(vs.at(k)));
      t.states.push_back(std::move(s));
      if (step > 0) {
        t.disturbances.push_back(r.at("disturbance").at("index").get<std::size_t>());
        t.logp_model.push_back(r.at("logp").get<double>());
        t.logp_sampler.push_back(r.at("logq").get<double>());
      }
      if (r.at("terminal").get<bool>()) {
        t.ended_in_failure = r.at("failure").get<bool>();
        open = false;
      }
    } catch (const json::exception& e) {
      throw FormatError("trajectory file line " + std::to_string(lineno) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("trajectory file line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (open || out.size() != expected) throw FormatError("trajectory file: truncated");
  return out;
}

void export_trajectories(std::span<const SceneTrajectory> trajs, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  write_trajectories(out, trajs);
  if (!out) throw FormatError("write failed: " + path.string());
}

std::vector<SceneTrajectory> parse_trajectories(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_trajectories(in);
}

}  // namespace faildist::harness
