#include "hrtfkit/direction.hpp"

#include <algorithm>
#include <cstdio>
#include <regex>

#include "hrtfkit/error.hpp"

namespace hrtfkit {

const char* ear_name(Ear ear) { return ear == Ear::Left ? "left" : "right"; }

Direction Direction::make(int azimuth_deg, int elevation_deg) {
  if (elevation_deg < -40 || elevation_deg > 90) {
    throw PreconditionError("elevation " + std::to_string(elevation_deg) + " outside [-40, 90]");
  }
  int az = azimuth_deg % 360;
  if (az <= -180) az += 360;
  if (az > 180) az -= 360;
  return Direction{az, elevation_deg};
}

Direction Direction::mirrored() const { return make(-azimuth_deg, elevation_deg); }

std::string to_string(const Direction& d) {
  return "(" + std::to_string(d.azimuth_deg) + ", " + std::to_string(d.elevation_deg) + ")";
}

std::string direction_tag(const Direction& d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "az%+04d_el%+03d", d.azimuth_deg, d.elevation_deg);
  return buf;
}

std::string bir_filename(const Direction& d) { return "bir_" + direction_tag(d) + ".csv"; }
std::string hrir_filename(const Direction& d) { return "hrir_" + direction_tag(d) + ".txt"; }

std::string oir_filename(int elevation_deg) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "oir_el%+03d.csv", elevation_deg);
  return buf;
}

std::optional<Direction> parse_direction_tag(const std::string& filename) {
  static const std::regex re(R"(az([+-]?\d+)_el([+-]?\d+))");
  std::smatch m;
  if (!std::regex_search(filename, m, re)) return std::nullopt;
  try {
    return Direction::make(std::stoi(m[1].str()), std::stoi(m[2].str()));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

MeasurementGrid MeasurementGrid::standard() {
  std::vector<int> az;
  for (int a = -175; a <= 180; a += 5) az.push_back(a);
  std::vector<int> el;
  for (int e = -40; e <= 90; e += 5) el.push_back(e);
  return MeasurementGrid(std::move(az), std::move(el));
}

MeasurementGrid::MeasurementGrid(std::vector<int> azimuths, std::vector<int> elevations)
    : azimuths_(std::move(azimuths)), elevations_(std::move(elevations)) {
  std::sort(azimuths_.begin(), azimuths_.end());
  std::sort(elevations_.begin(), elevations_.end());
  for (int el : elevations_) {
    for (int az : azimuths_) directions_.push_back(Direction::make(az, el));
  }
  std::sort(directions_.begin(), directions_.end());
  if (std::adjacent_find(directions_.begin(), directions_.end()) != directions_.end()) {
    throw PreconditionError("measurement grid contains duplicate directions");
  }
}

}  // namespace hrtfkit
