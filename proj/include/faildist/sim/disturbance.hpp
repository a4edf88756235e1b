#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace faildist::sim {

enum class DisturbanceKind : std::uint8_t {
  NoDisturb,
  MediumSlow,
  MajorSlow,
  MediumSpeed,
  MajorSpeed,
  ToggleBlinker,
  ToggleIntent,
};

inline constexpr std::size_t kNumDisturbanceKinds = 7;

/// Acceleration offset applied to the acting adversary (m/s^2).
inline constexpr std::array<double, kNumDisturbanceKinds> kAccelDelta{0.0, -1.5, -3.0, 1.5,
                                                                      3.0,  0.0,  0.0};

/// Per-timestep probability of each disturbance for one adversary.
inline constexpr std::array<double, kNumDisturbanceKinds> kNominalProb{0.976, 1e-2, 1e-3, 1e-2,
                                                                       1e-3,  1e-3, 1e-3};

inline double accel_delta(DisturbanceKind k) { return kAccelDelta[static_cast<std::size_t>(k)]; }
inline double nominal_prob(DisturbanceKind k) { return kNominalProb[static_cast<std::size_t>(k)]; }

std::string_view to_string(DisturbanceKind k);
DisturbanceKind disturbance_from_string(std::string_view s);

/// One adversary acts per step; the rest follow their nominal driver.
struct JointDisturbance {
  std::size_t actor_index = 0;
  DisturbanceKind kind = DisturbanceKind::NoDisturb;

  std::size_t encode() const { return actor_index * kNumDisturbanceKinds + static_cast<std::size_t>(kind); }
  static JointDisturbance decode(std::size_t index) {
    return {index / kNumDisturbanceKinds,
            static_cast<DisturbanceKind>(index % kNumDisturbanceKinds)};
  }

  bool operator==(const JointDisturbance&) const = default;
};

}  // namespace faildist::sim
