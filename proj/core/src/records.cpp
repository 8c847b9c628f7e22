#include "overtake/records.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "overtake/config.hpp"
#include "overtake/error.hpp"

namespace overtake {

void write_metrics_csv(std::ostream& out, std::span<const EpisodeMetrics> history) {
  out << kMetricsHeader << '\n';
  for (const auto& m : history) {
    out << m.episode << ',' << format_double(m.ret) << ',' << format_double(m.return_normalized)
        << ',' << m.steps << ',' << (m.collision ? 1 : 0) << ',' << format_double(m.mean_speed)
        << ',' << format_double(m.distance) << ',' << format_double(m.epsilon) << ','
        << format_double(m.mean_td_error) << '\n';
  }
}

void save_metrics_csv(const std::filesystem::path& path, std::span<const EpisodeMetrics> history) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write metrics file '" + path.string() + "'");
  write_metrics_csv(out, history);
  if (!out) throw IoError("failed writing metrics file '" + path.string() + "'");
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

template <typename T>
T parse_cell(const std::string& cell, int row) {
  T v{};
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
    throw FormatError("metrics: bad value '" + cell + "' in row " + std::to_string(row));
  return v;
}

}  // namespace

std::vector<EpisodeMetrics> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) throw FormatError("metrics: unexpected header");
  std::vector<EpisodeMetrics> rows;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 9) throw FormatError("metrics: row " + std::to_string(row) + " has wrong column count");
    EpisodeMetrics m;
    m.episode = parse_cell<int>(cells[0], row);
    m.ret = parse_cell<double>(cells[1], row);
    m.return_normalized = parse_cell<double>(cells[2], row);
    m.steps = parse_cell<int>(cells[3], row);
    m.collision = parse_cell<int>(cells[4], row) != 0;
    m.mean_speed = parse_cell<double>(cells[5], row);
    m.distance = parse_cell<double>(cells[6], row);
    m.epsilon = parse_cell<double>(cells[7], row);
    m.mean_td_error = parse_cell<double>(cells[8], row);
    rows.push_back(m);
  }
  return rows;
}

std::vector<EpisodeMetrics> load_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read metrics file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_metrics_csv(buf.str());
}

std::string trace_line(const TraceRecord& rec) {
  nlohmann::ordered_json j{{"tick", rec.tick},       {"time", rec.time},
                           {"id", rec.vehicle_id},   {"role", to_string(rec.role)},
                           {"x", rec.x},             {"y", rec.y},
                           {"v1", rec.v1},           {"lane", rec.lane},
                           {"heading", rec.heading}, {"action", rec.action},
                           {"reward", rec.reward},   {"done", rec.done}};
  return j.dump();
}

TraceRecord parse_trace_line(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    TraceRecord r;
    r.tick = j.at("tick").get<std::int64_t>();
    r.time = j.at("time").get<double>();
    r.vehicle_id = j.at("id").get<int>();
    const auto role = j.at("role").get<std::string>();
    if (role != "ego" && role != "surrounding") throw FormatError("trace: unknown role '" + role + "'");
    r.role = role == "ego" ? Role::kEgo : Role::kSurrounding;
    r.x = j.at("x").get<double>();
    r.y = j.at("y").get<double>();
    r.v1 = j.at("v1").get<double>();
    r.lane = j.at("lane").get<int>();
    r.heading = j.at("heading").get<double>();
    r.action = j.at("action").get<int>();
    r.reward = j.at("reward").get<double>();
    r.done = j.at("done").get<bool>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("trace: ") + e.what());
  }
}

std::vector<TraceRecord> load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read trace file '" + path.string() + "'");
  std::vector<TraceRecord> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(parse_trace_line(line));
  return out;
}

std::vector<TraceRecord> trace_rows(const WorldState& world, int action, double reward, bool done) {
  std::vector<TraceRecord> rows;
  rows.reserve(world.vehicles.size());
  for (const auto& v : world.vehicles) {
    rows.push_back({world.tick, world.time, v.id, v.role, v.x, v.y, v.v1, v.lane, v.heading, action,
                    reward, done});
  }
  return rows;
}

}  // namespace overtake
