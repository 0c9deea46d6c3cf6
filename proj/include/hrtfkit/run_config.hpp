#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace hrtfkit {

// Every tunable of a CLI run. Defaults match the library defaults; a copy is
// written next to each command's output as run_config.txt.
struct RunConfig {
  double sample_rate = 48000.0;
  int shift_m = 48;
  double head_radius = 0.0875;
  double speed_of_sound = 343.0;
  double air_density = 1.21;
  int window_pre_peak = 48;
  int window_min_gap = 120;
  double sc_f_lo = 3000.0;
  double sc_f_hi = 16000.0;
  int sc_smoothing_bins = 5;
  int sc_neighborhood_bins = 50;
  double sc_min_prominence_db = 3.0;
  std::uint64_t seed = 1;
};

// Environment variable naming a default config file.
inline constexpr const char* kConfigEnvVar = "HRTFKIT_CONFIG";

// key=value text; unknown keys are an error, missing keys keep defaults.
RunConfig read_run_config(const std::string& path);

// Applies $HRTFKIT_CONFIG when it is set, else returns defaults.
RunConfig load_default_run_config();

// Writes the config plus free-form provenance entries (command, inputs).
void write_run_config(const std::string& path, const RunConfig& cfg,
                      const std::map<std::string, std::string>& provenance = {});

}  // namespace hrtfkit
