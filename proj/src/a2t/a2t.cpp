#include "faildist/a2t/a2t.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "faildist/core/errors.hpp"
#include "faildist/dp/pair.hpp"

namespace faildist::a2t {

namespace {

constexpr char kMagic[4] = {'F', 'D', 'A', 'T'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kFeaturesPerVehicle = 4;

template <class T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw FormatError("checkpoint: truncated file");
  return value;
}

void put_array(std::ofstream& out, std::span<const double> v) {
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_array(std::ifstream& in, std::size_t n) {
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw FormatError("checkpoint: truncated array");
  return v;
}

}  // namespace

LossAndGradient loss_and_gradient(const A2TNetwork& net, std::span<const Sample> batch) {
  if (batch.empty()) throw ContractViolation("loss_and_gradient: empty batch");
  LossAndGradient out;
  out.grad.assign(net.params().size(), 0.0);
  const double n = static_cast<double>(batch.size());
  for (const Sample& s : batch) {
    const double err = net.forward(s.x, s.u) - s.target;
    out.loss += err * err / n;
    net.accumulate_gradient(s.x, s.u, 2.0 * err / n, out.grad);
  }
  return out;
}

FeatureScaling default_scaling(const sim::Simulator& sim) {
  FeatureScaling f;
  const auto& road = sim.road();
  double longest = road.route(sim::RouteId::EgoLeftTurn).length();
  for (std::size_t r = 0; r < sim::kNumRoutes; ++r) {
    longest = std::max(longest, road.route(static_cast<sim::RouteId>(r)).length());
  }
  const std::size_t vehicles = sim.num_adversaries() + 1;
  for (std::size_t i = 0; i < vehicles; ++i) {
    f.offset.insert(f.offset.end(), {0.0, 0.0, 0.0, 0.0});
    f.scale.insert(f.scale.end(), {longest, sim.config().max_speed, 1.0, 1.0});
  }
  return f;
}

SceneEncoder::SceneEncoder(const sim::Simulator& sim, std::vector<std::shared_ptr<const dp::ValueGrid>> solutions)
    : SceneEncoder(default_scaling(sim), std::move(solutions)) {}

SceneEncoder::SceneEncoder(FeatureScaling scaling, std::vector<std::shared_ptr<const dp::ValueGrid>> solutions)
    : scaling_(std::move(scaling)), solutions_(std::move(solutions)) {
  if (scaling_.offset.size() != scaling_.scale.size() || scaling_.offset.size() % kFeaturesPerVehicle != 0) {
    throw ContractViolation("SceneEncoder: malformed feature scaling");
  }
  for (double s : scaling_.scale) {
    if (!(s > 0.0)) throw ContractViolation("SceneEncoder: feature scale must be positive");
  }
  for (const auto& g : solutions_) {
    if (!g) throw ContractViolation("SceneEncoder: null sub-solution");
  }
}

void SceneEncoder::encode(const sim::SceneState& s, std::vector<double>& x, std::vector<double>& u) const {
  if (s.adversaries.size() != solutions_.size() ||
      s.num_vehicles() * kFeaturesPerVehicle != scaling_.offset.size()) {
    throw ContractViolation("SceneEncoder: scene does not match the encoder's adversary count");
  }
  x.resize(scaling_.offset.size());
  for (std::size_t i = 0; i < s.num_vehicles(); ++i) {
    const auto& v = s.vehicle(i);
    const double raw[kFeaturesPerVehicle] = {v.pos, v.vel, v.blinker ? 1.0 : 0.0, v.intent_turn ? 1.0 : 0.0};
    for (std::size_t k = 0; k < kFeaturesPerVehicle; ++k) {
      const std::size_t j = i * kFeaturesPerVehicle + k;
      x[j] = (raw[k] - scaling_.offset[j]) / scaling_.scale[j];
    }
  }
  u.resize(solutions_.size());
  for (std::size_t i = 0; i < solutions_.size(); ++i) {
    u[i] = solutions_[i]->interpolate(dp::pair_projection(s, i));
  }
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  const auto& sh = net.shape();
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, sh.inputs);
  put<std::uint64_t>(out, sh.solutions);
  put<std::uint64_t>(out, sh.base_hidden);
  put<std::uint64_t>(out, sh.attention_hidden);
  put<std::uint64_t>(out, scaling.offset.size());
  put_array(out, scaling.offset);
  put_array(out, scaling.scale);
  put_array(out, net.params());
  if (!out) throw FormatError("failed writing " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  char magic[4];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw FormatError(path.string() + " is not a checkpoint");
  if (get<std::uint32_t>(in) != kVersion) throw FormatError("unsupported checkpoint version");
  A2TShape sh;
  sh.inputs = get<std::uint64_t>(in);
  sh.solutions = get<std::uint64_t>(in);
  sh.base_hidden = get<std::uint64_t>(in);
  sh.attention_hidden = get<std::uint64_t>(in);
  const auto nfeat = get<std::uint64_t>(in);
  if (sh.inputs == 0 || sh.base_hidden == 0 || sh.attention_hidden == 0 || nfeat != sh.inputs ||
      sh.inputs > (1u << 20) || sh.base_hidden > (1u << 16) || sh.attention_hidden > (1u << 16) ||
      sh.solutions > (1u << 16)) {
    throw FormatError("checkpoint: implausible header");
  }
  Checkpoint c;
  c.scaling.offset = get_array(in, nfeat);
  c.scaling.scale = get_array(in, nfeat);
  c.net = A2TNetwork(sh);
  const auto p = get_array(in, sh.num_params());
  std::copy(p.begin(), p.end(), c.net.params().begin());
  return c;
}

}  // namespace faildist::a2t
