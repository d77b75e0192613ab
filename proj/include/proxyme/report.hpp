#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "proxyme/experiment.hpp"
#include "proxyme/simulation.hpp"

namespace proxyme {

inline constexpr std::array<Millis, 4> kReportWindowsMs{0, 1500, 3000, 5600};

struct ModeColumn {
  LatencySummary summary;
  /// Mean perceived gap per window in kReportWindowsMs.
  std::array<double, kReportWindowsMs.size()> mean_gap_ms{};
};

struct LatencyReportData {
  std::optional<ModeColumn> batch;
  std::optional<ModeColumn> streaming;
};

LatencyReportData build_report(const std::vector<TrialLogEntry>& entries);
std::string render_report(const LatencyReportData& data);

/// Loads every session log under log_dir. Throws NoLogsFound when there is
/// none or none holds a trial.
std::string report(const std::filesystem::path& log_dir);

}  // namespace proxyme
