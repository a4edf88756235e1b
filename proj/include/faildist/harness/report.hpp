#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "faildist/harness/metrics.hpp"

namespace faildist::harness {

std::string results_csv(std::span<const MetricsReport> reports);
/// Aligned plain-text table, one row per method.
std::string results_table(std::span<const MetricsReport> reports, const std::string& title = {});

struct Timing {
  std::string task;
  double seconds = 0.0;
};

std::string timings_csv(std::span<const Timing> timings);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace faildist::harness
