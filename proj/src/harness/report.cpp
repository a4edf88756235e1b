#include "faildist/harness/report.hpp"

#include <fstream>

#include <fmt/format.h>

#include "faildist/core/errors.hpp"

namespace faildist::harness {

std::string results_csv(std::span<const MetricsReport> reports) {
  std::string out =
      "method,seed,n_rollouts,n_failures,failure_rate,failure_rate_std,n_failures_used,loglik_rollouts,failures_seen,"
      "loglik_step,loglik_step_se,loglik_total,loglik_total_se,insufficient_failures\n";
  for (const auto& r : reports) {
    out += fmt::format("{},{},{},{},{:.6g},{:.6g},{},{},{},{:.6g},{:.6g},{:.6g},{:.6g},{}\n", r.method, r.seed,
                       r.n_rollouts, r.n_failures, r.failure_rate, r.failure_rate_std, r.n_failures_used,
                       r.loglik_rollouts, r.failures_seen, r.loglik_step, r.loglik_step_se, r.loglik_total, r.loglik_total_se,
                       r.insufficient_failures ? 1 : 0);
  }
  return out;
}

std::string results_table(std::span<const MetricsReport> reports, const std::string& title) {
  std::string out;
  if (!title.empty()) out += title + "\n";
  out += fmt::format("{:<12} {:>20} {:>22} {:>22} {:>9}\n", "method", "failure rate", "loglik / step",
                     "loglik / trajectory", "failures");
  for (const auto& r : reports) {
    const std::string rate = fmt::format("{:.4f} ± {:.4f}", r.failure_rate, r.failure_rate_std);
    std::string step = "n/a", total = "n/a";
    if (r.n_failures_used > 0) {
      step = fmt::format("{:.3f} ± {:.3f}", r.loglik_step, r.loglik_step_se);
      total = fmt::format("{:.2f} ± {:.2f}", r.loglik_total, r.loglik_total_se);
    }
    // Pad by display width; ± is two bytes.
    auto pad = [](const std::string& s, std::size_t width) {
      std::size_t shown = 0;
      for (unsigned char c : s) shown += (c & 0xC0) != 0x80 ? 1 : 0;
      return std::string(width > shown ? width - shown : 0, ' ') + s;
    };
    out += fmt::format("{:<12} {} {} {} {:>9}{}\n", r.method, pad(rate, 20), pad(step, 22), pad(total, 22),
                       r.n_failures_used, r.insufficient_failures ? " (short)" : "");
  }
  return out;
}

std::string timings_csv(std::span<const Timing> timings) {
  std::string out = "task,seconds\n";
  for (const auto& t : timings) out += fmt::format("{},{:.3f}\n", t.task, t.seconds);
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out) throw FormatError("write failed: " + path.string());
}

}  // namespace faildist::harness
