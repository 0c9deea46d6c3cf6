#include "hrtfkit/run_config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "hrtfkit/error.hpp"

namespace hrtfkit {
namespace {

struct Binding {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
Binding real(const char* key, T RunConfig::*field) {
  return {key, [field](RunConfig& c, const std::string& v) { c.*field = std::stod(v); },
          [field](const RunConfig& c) { return fmt(c.*field); }};
}

template <typename T>
Binding integer(const char* key, T RunConfig::*field) {
  return {key,
          [field](RunConfig& c, const std::string& v) { c.*field = static_cast<T>(std::stoull(v)); },
          [field](const RunConfig& c) { return std::to_string(c.*field); }};
}

Binding signed_integer(const char* key, int RunConfig::*field) {
  return {key, [field](RunConfig& c, const std::string& v) { c.*field = std::stoi(v); },
          [field](const RunConfig& c) { return std::to_string(c.*field); }};
}

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> b{
      real("sample_rate", &RunConfig::sample_rate),
      signed_integer("shift_m", &RunConfig::shift_m),
      real("head_radius", &RunConfig::head_radius),
      real("speed_of_sound", &RunConfig::speed_of_sound),
      real("air_density", &RunConfig::air_density),
      signed_integer("window_pre_peak", &RunConfig::window_pre_peak),
      signed_integer("window_min_gap", &RunConfig::window_min_gap),
      real("sc_f_lo", &RunConfig::sc_f_lo),
      real("sc_f_hi", &RunConfig::sc_f_hi),
      signed_integer("sc_smoothing_bins", &RunConfig::sc_smoothing_bins),
      signed_integer("sc_neighborhood_bins", &RunConfig::sc_neighborhood_bins),
      real("sc_min_prominence_db", &RunConfig::sc_min_prominence_db),
      integer("seed", &RunConfig::seed),
  };
  return b;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig read_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = path + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw DataError(where + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.rfind("provenance.", 0) == 0) continue;
    bool found = false;
    for (const auto& b : bindings()) {
      if (key != b.key) continue;
      found = true;
      try {
        b.set(cfg, value);
      } catch (const std::exception&) {
        throw DataError(where + ": bad value '" + value + "' for " + key);
      }
    }
    if (!found) throw DataError(where + ": unknown key '" + key + "'");
  }
  return cfg;
}

RunConfig load_default_run_config() {
  const char* path = std::getenv(kConfigEnvVar);
  if (path == nullptr || *path == '\0') return {};
  return read_run_config(path);
}

void write_run_config(const std::string& path, const RunConfig& cfg,
                      const std::map<std::string, std::string>& provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  for (const auto& b : bindings()) out << b.key << "=" << b.get(cfg) << "\n";
  for (const auto& [k, v] : provenance) out << "provenance." << k << "=" << v << "\n";
}

}  // namespace hrtfkit
