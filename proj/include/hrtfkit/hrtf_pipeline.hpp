#pragma once

// Raw binaural/origin impulse responses -> causal 512-sample HRIR database.
//
//   BIR, OIR --window--> 512 samples --FFT--> H = G_ear / G_0 --IFFT-->
//   circular shift by m --> HRIR
//
// One window start is shared by every IR in a build; the end point is chosen
// per IR at the first zero crossing at least `min_gap` samples past its peak.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "hrtfkit/direction.hpp"
#include "hrtfkit/signal_core.hpp"

namespace hrtfkit {

struct BinauralPair {
  ImpulseResponse left;
  ImpulseResponse right;

  const ImpulseResponse& ear(Ear e) const { return e == Ear::Left ? left : right; }
};

struct RawMeasurementSet {
  std::map<Direction, BinauralPair> bir;
  std::map<int, ImpulseResponse> oir;  // keyed by elevation
  double sample_rate = kDefaultSampleRate;
};

struct WindowStart {
  std::size_t index = 0;
  bool clamped = false;  // the ideal start was negative and has been set to 0
};

// 1 ms before the earlier of the two ipsilateral 90-degree peaks:
// min(peak(left @ -90,0), peak(right @ +90,0)) - pre_peak.
WindowStart compute_window_start(const RawMeasurementSet& set, std::size_t pre_peak = 48);

struct WindowBounds {
  std::size_t start = 0;
  std::size_t peak = 0;
  std::size_t end = 0;  // exclusive
};

WindowBounds window_bounds(const ImpulseResponse& ir, std::size_t start, std::size_t min_gap = 120);

// ir[start, end) zero-padded to 512 samples; t0_offset records `start`.
ImpulseResponse apply_time_window(const ImpulseResponse& ir, std::size_t start,
                                  std::size_t min_gap = 120);

struct DerivedHrtf {
  Spectrum spectrum;
  std::vector<std::size_t> flagged_bins;  // |G_0| below the floor, set to 0
};

// Per-bin G_ear / G_0. Bins where |G_0| < floor * max|G_0| are zeroed and
// listed rather than divided.
DerivedHrtf derive_hrtf(const Spectrum& btf, const Spectrum& otf, double floor = 1e-4);

// l / c, in seconds.
double max_noncausal_delay(double head_radius, double speed_of_sound = 343.0);

// Throws PreconditionError unless tau_max * F_s < m < N/2.
void validate_shift(int m, double head_radius, double speed_of_sound = 343.0,
                    double sample_rate = kDefaultSampleRate, std::size_t length = kHrirLength);

ImpulseResponse compensate_noncausality(const ImpulseResponse& hrir, int m, double head_radius,
                                        double speed_of_sound = 343.0);

struct DatabaseMeta {
  double sample_rate = kDefaultSampleRate;
  int shift_m = 0;
  std::size_t window_start = 0;
  bool window_clamped = false;
  double head_radius = 0.0875;
  std::string subject;
  bool compensated = true;
  std::size_t flagged_bins = 0;  // total across all directions and ears
};

struct HrirDatabase {
  std::map<Direction, BinauralPair> hrir;
  DatabaseMeta meta;

  const BinauralPair& at(const Direction& d) const;
};

struct BuildConfig {
  int shift_m = 48;
  double head_radius = 0.0875;
  double speed_of_sound = 343.0;
  bool compensate = true;
  std::string subject = "synthetic";
  std::size_t pre_peak = 48;
  std::size_t min_gap = 120;
};

// Processes every direction in `grid` (OpenMP-parallel over directions).
// The result does not depend on the thread count. Any per-direction failure
// aborts the build with a DataError naming every failed direction.
HrirDatabase build_database(const RawMeasurementSet& set, const BuildConfig& cfg = {},
                            const MeasurementGrid& grid = MeasurementGrid::standard());

// Single-threaded reference implementation of build_database.
HrirDatabase build_database_serial(const RawMeasurementSet& set, const BuildConfig& cfg = {},
                                   const MeasurementGrid& grid = MeasurementGrid::standard());

// ---- file formats ------------------------------------------------------

// Raw layout: bir_az{+DDD}_el{+DD}.csv ("L,R" x 4096) and oir_el{+DD}.csv.
void write_raw_set(const std::string& dir, const RawMeasurementSet& set);
RawMeasurementSet read_raw_set(const std::string& dir);

// Two whitespace-separated columns (left right), 512 rows.
void write_hrir_file(const std::string& path, const BinauralPair& pair);
BinauralPair read_hrir_file(const std::string& path, double sample_rate = kDefaultSampleRate);

struct HrirFile {
  Direction direction;
  BinauralPair pair;
};
// As read_hrir_file, with the direction parsed from the file name.
HrirFile read_hrir_file_with_direction(const std::string& path,
                                       double sample_rate = kDefaultSampleRate);

void write_database(const std::string& dir, const HrirDatabase& db);
// Reads every hrir_*.txt file plus db_meta if present; without db_meta the
// published-database convention (48 kHz, unknown provenance) is assumed.
HrirDatabase read_database(const std::string& dir);

void write_db_meta(const std::string& path, const DatabaseMeta& meta);
DatabaseMeta read_db_meta(const std::string& path);

}  // namespace hrtfkit
