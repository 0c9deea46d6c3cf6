#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace hrtfkit {

enum class Ear { Left, Right };

const char* ear_name(Ear ear);

// A measurement direction on the 5-degree grid. Azimuth is clockwise-positive
// toward the right ear, -180 < az <= 180; elevation -40..90.
struct Direction {
  int azimuth_deg = 0;
  int elevation_deg = 0;

  // Wraps azimuth into (-180, 180] and validates the elevation range.
  static Direction make(int azimuth_deg, int elevation_deg);

  Direction mirrored() const;  // (-az, el), canonicalised

  // Ordered by elevation first, then azimuth, which is the on-disk order.
  friend auto operator<=>(const Direction& a, const Direction& b) {
    if (auto c = a.elevation_deg <=> b.elevation_deg; c != 0) return c;
    return a.azimuth_deg <=> b.azimuth_deg;
  }
  friend bool operator==(const Direction&, const Direction&) = default;
};

std::string to_string(const Direction& d);

// "az{+DDD}_el{+DD}" with explicit sign and zero padding.
std::string direction_tag(const Direction& d);
std::string bir_filename(const Direction& d);   // bir_az-090_el+00.csv
std::string hrir_filename(const Direction& d);  // hrir_az-090_el+00.txt
std::string oir_filename(int elevation_deg);    // oir_el+00.csv

// Extracts the direction from any name containing "az<int>_el<int>".
std::optional<Direction> parse_direction_tag(const std::string& filename);

class MeasurementGrid {
 public:
  // 72 azimuths (-175..180) x 27 elevations (-40..90), 5-degree steps.
  static MeasurementGrid standard();
  MeasurementGrid(std::vector<int> azimuths, std::vector<int> elevations);

  const std::vector<int>& azimuths() const { return azimuths_; }
  const std::vector<int>& elevations() const { return elevations_; }
  // Every (az, el) pair, sorted by elevation then azimuth.
  const std::vector<Direction>& directions() const { return directions_; }
  std::size_t size() const { return directions_.size(); }

 private:
  std::vector<int> azimuths_;
  std::vector<int> elevations_;
  std::vector<Direction> directions_;
};

}  // namespace hrtfkit
