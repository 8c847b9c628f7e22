#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "overtake/agents.hpp"
#include "overtake/env.hpp"

namespace overtake {

inline constexpr const char* kMetricsHeader =
    "episode,return,return_normalized,steps,collision,mean_speed,distance,epsilon,"
    "mean_td_error";

void write_metrics_csv(std::ostream& out, std::span<const EpisodeMetrics> history);
void save_metrics_csv(const std::filesystem::path& path, std::span<const EpisodeMetrics> history);
// Throws FormatError on a bad header or row.
std::vector<EpisodeMetrics> parse_metrics_csv(const std::string& text);
std::vector<EpisodeMetrics> load_metrics_csv(const std::filesystem::path& path);

// One JSONL row per vehicle per simulation tick.
struct TraceRecord {
  std::int64_t tick = 0;
  double time = 0.0;
  int vehicle_id = 0;
  Role role = Role::kSurrounding;
  double x = 0.0, y = 0.0, v1 = 0.0;
  int lane = 1;
  double heading = 0.0;
  int action = 0;       // meta-action index 1..5 of the current policy step
  double reward = 0.0;  // reward of the current policy step
  bool done = false;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

std::string trace_line(const TraceRecord& rec);
TraceRecord parse_trace_line(const std::string& line);
std::vector<TraceRecord> load_trace(const std::filesystem::path& path);

// Rows for every vehicle in `world`.
std::vector<TraceRecord> trace_rows(const WorldState& world, int action, double reward,
                                    bool done);

}  // namespace overtake
