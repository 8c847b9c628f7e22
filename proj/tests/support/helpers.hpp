#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <unistd.h>

#include "overtake/world.hpp"

namespace testing_support {

inline overtake::VehicleState car(int id, int lane, double x, double v,
                                  const overtake::RoadConfig& road = {}) {
  overtake::VehicleState s;
  s.id = id;
  s.role = id == 0 ? overtake::Role::kEgo : overtake::Role::kSurrounding;
  s.x = x;
  s.y = road.lane_center(lane);
  s.v1 = v;
  s.lane = s.target_lane = lane;
  s.target_speed = v;
  return s;
}

// A world holding exactly the given vehicles; the first one must be the ego.
inline overtake::WorldState world_of(std::initializer_list<overtake::VehicleState> cars,
                                     const overtake::RoadConfig& road = {}) {
  overtake::WorldState w;
  w.road = road;
  w.vehicles.assign(cars.begin(), cars.end());
  return w;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("overtake-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace testing_support
