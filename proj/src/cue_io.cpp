#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "hrtfkit/error.hpp"
#include "hrtfkit/localization_cues.hpp"

namespace hrtfkit::cues {
namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return out;
}

std::string num(double v, const char* fmt = "%.6f") {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

void write_direction_table_csv(const std::string& path, const std::map<Direction, double>& values,
                               double scale) {
  std::set<int> azimuths;
  std::set<int> elevations;
  for (const auto& kv : values) {
    azimuths.insert(kv.first.azimuth_deg);
    elevations.insert(kv.first.elevation_deg);
  }
  auto out = open_out(path);
  out << "elevation_deg";
  for (int az : azimuths) out << "," << az;
  out << "\n";
  for (int el : elevations) {
    out << el;
    for (int az : azimuths) {
      const auto it = values.find(Direction{az, el});
      out << "," << (it == values.end() ? std::string("nan") : num(it->second * scale));
    }
    out << "\n";
  }
}

void write_itd_csv(const std::string& path, const ItdMap& itd) {
  write_direction_table_csv(path, itd.values, 1e6);
}

void write_ild_narrow_csv(const std::string& path, const NarrowbandIld& ild) {
  auto out = open_out(path);
  out << "freq_hz,ild_db\n";
  for (std::size_t k = 0; k < ild.frequencies.size(); ++k) {
    out << num(ild.frequencies[k], "%.1f") << "," << num(ild.db[k]) << "\n";
  }
}

void write_sc_csv(const std::string& path, const std::vector<MedianPlaneEntry>& entries) {
  auto out = open_out(path);
  out << "extended_elevation_deg,kind,freq_hz,level_db\n";
  for (const auto& e : entries) {
    std::vector<std::pair<const SpectralFeature*, const char*>> rows;
    for (const auto& p : e.features.peaks) rows.emplace_back(&p, "peak");
    for (const auto& n : e.features.notches) rows.emplace_back(&n, "notch");
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      return a.first->frequency_hz < b.first->frequency_hz;
    });
    for (const auto& [f, kind] : rows) {
      out << num(e.extended_elevation, "%.0f") << "," << kind << "," << num(f->frequency_hz, "%.1f")
          << "," << num(f->level_db, "%.3f") << "\n";
    }
  }
}

std::vector<std::string> write_hpd_csvs(const std::string& dir, const HpdPattern& pattern) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  for (std::size_t i = 0; i < pattern.frequencies.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "hpd_%s_%.0f.csv", ear_name(pattern.ear), pattern.frequencies[i]);
    const std::string path = (std::filesystem::path(dir) / name).string();
    auto out = open_out(path);
    out << "azimuth_deg,db\n";
    for (std::size_t j = 0; j < pattern.azimuths.size(); ++j) {
      out << pattern.azimuths[j] << "," << num(pattern.db[i][j]) << "\n";
    }
    paths.push_back(path);
  }
  return paths;
}

}  // namespace hrtfkit::cues
