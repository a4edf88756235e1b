#include "faildist/dp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "faildist/core/errors.hpp"

namespace faildist::dp {

namespace {

constexpr char kMagic[4] = {'F', 'D', 'V', 'G'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw FormatError("value grid: truncated file");
  return value;
}

}  // namespace

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.knots;
  for (auto d : discrete_sizes) n *= d;
  return n;
}

std::array<std::size_t, kContinuousDims + kDiscreteDims> GridSpec::strides() const {
  std::array<std::size_t, kContinuousDims + kDiscreteDims> s{};
  std::size_t stride = 1;
  for (std::size_t d = kContinuousDims + kDiscreteDims; d-- > 0;) {
    s[d] = stride;
    stride *= d < kContinuousDims ? axes[d].knots : discrete_sizes[d - kContinuousDims];
  }
  return s;
}

PairState GridSpec::point(std::size_t flat) const {
  PairState ps;
  const auto st = strides();
  for (std::size_t d = 0; d < kContinuousDims; ++d) {
    ps.continuous[d] = axes[d].knot((flat / st[d]) % axes[d].knots);
  }
  for (std::size_t d = 0; d < kDiscreteDims; ++d) {
    ps.discrete[d] = static_cast<int>((flat / st[kContinuousDims + d]) % discrete_sizes[d]);
  }
  return ps;
}

void GridSpec::validate() const {
  for (const auto& a : axes) {
    if (a.knots == 0) throw ConfigError("grid axis needs at least one knot");
    if (a.knots > 1 && !(a.hi > a.lo)) throw ConfigError("grid axis needs hi > lo");
  }
  for (auto d : discrete_sizes) {
    if (d == 0) throw ConfigError("discrete grid axis needs at least one value");
  }
}

Stencil make_stencil(const GridSpec& spec, const PairState& query) {
  const auto st = spec.strides();
  Stencil out;
  for (std::size_t d = 0; d < kContinuousDims; ++d) {
    const Axis& a = spec.axes[d];
    if (a.knots == 1) continue;
    const double t = std::clamp((query.continuous[d] - a.lo) / (a.hi - a.lo), 0.0, 1.0) *
                     static_cast<double>(a.knots - 1);
    const auto i = std::min(static_cast<std::size_t>(t), a.knots - 2);
    out.base += i * st[d];
    out.frac[d] = t - static_cast<double>(i);
  }
  for (std::size_t d = 0; d < kDiscreteDims; ++d) {
    const int k = query.discrete[d];
    if (k < 0 || static_cast<std::size_t>(k) >= spec.discrete_sizes[d]) {
      throw ContractViolation("discrete coordinate out of range");
    }
    out.base += static_cast<std::size_t>(k) * st[kContinuousDims + d];
  }
  return out;
}

double evaluate_stencil(const GridSpec& spec, const Stencil& st, std::span<const double> values) {
  const auto strides = spec.strides();
  double total = 0.0;
  for (unsigned corner = 0; corner < (1u << kContinuousDims); ++corner) {
    double w = 1.0;
    std::size_t idx = st.base;
    for (std::size_t d = 0; d < kContinuousDims; ++d) {
      const bool upper = (corner >> d) & 1u;
      if (spec.axes[d].knots == 1) {
        if (upper) w = 0.0;
        continue;
      }
      if (upper) {
        w *= st.frac[d];
        idx += strides[d];
      } else {
        w *= 1.0 - st.frac[d];
      }
    }
    if (w != 0.0) total += w * values[idx];
  }
  return total;
}

ValueGrid::ValueGrid(GridSpec spec, std::vector<double> values, std::size_t pair_index)
    : spec_(spec), values_(std::move(values)), pair_index_(pair_index) {
  spec_.validate();
  if (values_.size() != spec_.size()) throw ContractViolation("value array does not match grid size");
}

double ValueGrid::interpolate(const PairState& query) const {
  return std::clamp(evaluate_stencil(spec_, make_stencil(spec_, query), values_), 0.0, 1.0);
}

void ValueGrid::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, pair_index_);
  put<std::uint32_t>(out, kContinuousDims);
  put<std::uint32_t>(out, kDiscreteDims);
  for (const auto& a : spec_.axes) {
    put<std::uint64_t>(out, a.knots);
    put<double>(out, a.lo);
    put<double>(out, a.hi);
  }
  for (auto d : spec_.discrete_sizes) put<std::uint64_t>(out, d);
  put<double>(out, residual);
  put<std::uint64_t>(out, sweeps);
  put<std::uint8_t>(out, converged ? 1 : 0);
  out.write(reinterpret_cast<const char*>(values_.data()),
            static_cast<std::streamsize>(values_.size() * sizeof(double)));
  if (!out) throw FormatError("failed writing " + path.string());
}

ValueGrid ValueGrid::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  char magic[4];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw FormatError(path.string() + " is not a value grid");
  }
  if (get<std::uint32_t>(in) != kVersion) throw FormatError("unsupported value grid version");
  const auto pair_index = get<std::uint64_t>(in);
  if (get<std::uint32_t>(in) != kContinuousDims || get<std::uint32_t>(in) != kDiscreteDims) {
    throw FormatError("value grid dimensionality mismatch");
  }
  GridSpec spec;
  for (auto& a : spec.axes) {
    a.knots = get<std::uint64_t>(in);
    a.lo = get<double>(in);
    a.hi = get<double>(in);
  }
  for (auto& d : spec.discrete_sizes) d = get<std::uint64_t>(in);
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("value grid header: ") + e.what());
  }
  const double residual = get<double>(in);
  const auto sweeps = get<std::uint64_t>(in);
  const bool converged = get<std::uint8_t>(in) != 0;
  std::vector<double> values(spec.size());
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) throw FormatError("value grid: truncated value array");
  ValueGrid g(spec, std::move(values), pair_index);
  g.residual = residual;
  g.sweeps = sweeps;
  g.converged = converged;
  return g;
}

}  // namespace faildist::dp
