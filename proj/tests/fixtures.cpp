#include "fixtures.hpp"

#include <filesystem>
#include <numbers>

namespace fixtures {

using namespace hrtfkit;

const synth::SynthOptions& default_options() {
  static const synth::SynthOptions opt;
  return opt;
}

const RawMeasurementSet& raw_set() {
  static const RawMeasurementSet set =
      synth::synth_set(default_options(), synth::SpeakerColoration::sealed_module());
  return set;
}

const HrirDatabase& database() {
  static const HrirDatabase db = build_database(raw_set());
  return db;
}

const HrirDatabase& uncompensated_database() {
  static const HrirDatabase db = [] {
    BuildConfig cfg;
    cfg.compensate = false;
    return build_database(raw_set(), cfg);
  }();
  return db;
}

std::string scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("hrtfkit_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    long double re = 0.0L;
    long double im = 0.0L;
    for (std::size_t t = 0; t < n; ++t) {
      // Reduce k*t mod n before the trig call to keep the angle exact.
      const long double ang = -2.0L * std::numbers::pi_v<long double> *
                              static_cast<long double>((k * t) % n) / static_cast<long double>(n);
      re += x[t] * std::cos(ang);
      im += x[t] * std::sin(ang);
    }
    out[k] = {static_cast<double>(re), static_cast<double>(im)};
  }
  return out;
}

}  // namespace fixtures
