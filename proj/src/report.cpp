#include "proxyme/report.hpp"

#include <cstdio>
#include <sstream>

#include "proxyme/pipeline.hpp"

namespace proxyme {

namespace {

ModeColumn column(const std::vector<TrialLogEntry>& entries) {
  ModeColumn c;
  c.summary = summarize(entries);
  for (std::size_t w = 0; w < kReportWindowsMs.size(); ++w) {
    double sum = 0;
    for (const auto& e : entries) {
      sum += static_cast<double>(compute_perceived_gap(e.trace, kReportWindowsMs[w]));
    }
    c.mean_gap_ms[w] = sum / static_cast<double>(entries.size());
  }
  return c;
}

std::string ms(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

template <class F>
std::string cell(const std::optional<ModeColumn>& c, F f) {
  return c ? ms(f(*c)) : std::string("absent");
}

}  // namespace

LatencyReportData build_report(const std::vector<TrialLogEntry>& entries) {
  std::vector<TrialLogEntry> batch, streaming;
  for (const auto& e : entries) (e.streaming ? streaming : batch).push_back(e);
  LatencyReportData d;
  if (!batch.empty()) d.batch = column(batch);
  if (!streaming.empty()) d.streaming = column(streaming);
  return d;
}

std::string render_report(const LatencyReportData& d) {
  std::ostringstream s;
  s << "# Latency report\n";
  for (const auto& [name, col] : {std::pair{"batch", &d.batch}, std::pair{"streaming", &d.streaming}}) {
    s << "\n## Stage latencies (" << name << ")\n\n";
    if (*col) {
      s << summary_markdown((*col)->summary);
    } else {
      s << "absent\n";
    }
  }

  s << "\n## Time to first audio, batch vs streaming\n\n"
    << "| metric | batch | streaming |\n|---|---|---|\n";
  const auto count = [](const std::optional<ModeColumn>& c) {
    return c ? std::to_string(c->summary.end_to_end.n) : std::string("absent");
  };
  s << "| runs | " << count(d.batch) << " | " << count(d.streaming) << " |\n";
  s << "| mean time to first audio ms | "
    << cell(d.batch, [](const ModeColumn& c) { return c.summary.time_to_first_audio.mean; })
    << " | "
    << cell(d.streaming, [](const ModeColumn& c) { return c.summary.time_to_first_audio.mean; })
    << " |\n";
  s << "| mean end to end ms | "
    << cell(d.batch, [](const ModeColumn& c) { return c.summary.end_to_end.mean; }) << " | "
    << cell(d.streaming, [](const ModeColumn& c) { return c.summary.end_to_end.mean; }) << " |\n";
  if (d.batch && d.streaming) {
    const double b = d.batch->summary.time_to_first_audio.mean;
    const double st = d.streaming->summary.time_to_first_audio.mean;
    s << "\nStreaming reduces mean time to first audio by " << ms(b - st) << " ms ("
      << ms(b > 0 ? 100.0 * (b - st) / b : 0.0) << "%).\n";
  }

  s << "\n## Perceived gap by masking window\n\n"
    << "| window ms | batch mean gap ms | streaming mean gap ms |\n|---|---|---|\n";
  for (std::size_t w = 0; w < kReportWindowsMs.size(); ++w) {
    s << "| " << kReportWindowsMs[w] << " | "
      << cell(d.batch, [w](const ModeColumn& c) { return c.mean_gap_ms[w]; }) << " | "
      << cell(d.streaming, [w](const ModeColumn& c) { return c.mean_gap_ms[w]; }) << " |\n";
  }
  return s.str();
}

std::string report(const std::filesystem::path& log_dir) {
  if (!std::filesystem::is_directory(log_dir)) {
    throw NoLogsFound(log_dir.string() + " is not a directory");
  }
  const auto entries = load_trial_logs(log_dir);
  if (entries.empty()) throw NoLogsFound("no trial logs under " + log_dir.string());
  return render_report(build_report(entries));
}

}  // namespace proxyme
