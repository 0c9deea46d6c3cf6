#pragma once

// Binaural cues computed from an HrirDatabase: interaural time and level
// differences, pinna spectral features, and horizontal-plane directivity.

#include <map>
#include <string>
#include <vector>

#include "hrtfkit/direction.hpp"
#include "hrtfkit/hrtf_pipeline.hpp"
#include "hrtfkit/signal_core.hpp"

namespace hrtfkit::cues {

inline constexpr double kItdMaxLag = 1000e-6;     // s
inline constexpr std::size_t kCueFftLength = 4800;  // 10 Hz bins at 48 kHz
inline constexpr int kPrtfWindow = 96;            // 2 ms at 48 kHz

// Time step of the cross-correlation grid: 1 / (4 F_s).
double itd_resolution(double sample_rate = kDefaultSampleRate);

// Low-pass both channels, upsample 4x, take the normalised cross-correlation
// peak within +-1 ms. Positive when the left ear lags (source on the right).
double compute_itd(const ImpulseResponse& left, const ImpulseResponse& right);

struct ItdMap {
  std::map<Direction, double> values;  // seconds
  double resolution = 0.0;
};

ItdMap itd_map(const HrirDatabase& db);
ItdMap itd_map_serial(const HrirDatabase& db);

struct NarrowbandIld {
  double bin_spacing = 0.0;
  std::vector<double> frequencies;  // 0 .. F_s/2
  std::vector<double> db;           // NaN where flagged
  std::vector<bool> flagged;        // either ear below 1e-6 of its own peak
};

// 20 log10 |H_R / H_L| on the 4800-point grid. Both channels are first
// rotated together so their joint energy centroid sits mid-buffer; the result
// is therefore unchanged by any common circular shift of the pair.
NarrowbandIld ild_narrowband(const ImpulseResponse& left, const ImpulseResponse& right);

// 10 log10 of the ratio of right to left energy between f_lo and f_hi,
// trapezoidal on the 10 Hz grid.
double ild_wideband(const ImpulseResponse& left, const ImpulseResponse& right, double f_lo = 20.0,
                    double f_hi = 20000.0);

std::map<Direction, double> ild_wideband_map(const HrirDatabase& db);

// 2 ms Hann window centred on the HRIR's peak, zero-padded to 4800, FFT.
Spectrum extract_prtf(const ImpulseResponse& hrir, int window_length = kPrtfWindow);

struct FeatureSearch {
  double f_lo = 3000.0;
  double f_hi = 16000.0;
  int smoothing_bins = 5;   // centred moving average of the dB curve
  int neighborhood_bins = 50;
  double min_prominence_db = 3.0;
};

struct SpectralFeature {
  double frequency_hz = 0.0;
  double level_db = 0.0;       // smoothed curve
  double prominence_db = 0.0;
};

struct SpectralFeatures {
  std::vector<SpectralFeature> peaks;    // ascending frequency
  std::vector<SpectralFeature> notches;  // ascending frequency
};

// Smoothed dB magnitude of bins 0..N/2, as searched by find_spectral_features.
std::vector<double> smoothed_db(const Spectrum& sp, int smoothing_bins);

// Local extrema of the smoothed dB curve inside the band. An extremum must
// dominate its +-neighborhood and stand out by at least min_prominence_db.
// Prominence is topographic: the drop (or rise) to the higher of the two
// bounding saddles, searched across the whole curve.
SpectralFeatures find_spectral_features(const Spectrum& prtf, const FeatureSearch& search = {});

// theta = 0 -> phi; theta = 180 -> 180 - phi (rear arc runs 90..220).
double median_plane_extended_elevation(const Direction& d);

struct MedianPlaneEntry {
  double extended_elevation = 0.0;
  Direction direction;
  SpectralFeatures features;
};

// PRTF features for every median-plane direction, sorted by extended
// elevation. (180, 90) duplicates (0, 90) and is skipped.
std::vector<MedianPlaneEntry> median_plane_features(const HrirDatabase& db, Ear ear = Ear::Right,
                                                    const FeatureSearch& search = {});

inline const std::vector<double>& default_hpd_frequencies() {
  static const std::vector<double> f{750.0, 1500.0, 3000.0, 6000.0, 12000.0};
  return f;
}

struct HpdPattern {
  Ear ear = Ear::Right;
  std::vector<double> frequencies;  // requested
  std::vector<double> bin_frequencies;  // nearest 10 Hz bin actually used
  std::vector<int> azimuths;
  std::vector<std::vector<double>> db;  // [frequency][azimuth]
};

// 20 log10 |H(theta, 0, f) / H(0, 0, f)| over the horizontal plane.
HpdPattern hpd(const HrirDatabase& db, Ear ear,
               const std::vector<double>& frequencies = default_hpd_frequencies());

// ---- CSV output --------------------------------------------------------

// Rows = elevations, columns = azimuths. Scale converts stored values.
void write_direction_table_csv(const std::string& path, const std::map<Direction, double>& values,
                               double scale = 1.0);
void write_itd_csv(const std::string& path, const ItdMap& itd);  // microseconds
void write_ild_narrow_csv(const std::string& path, const NarrowbandIld& ild);
void write_sc_csv(const std::string& path, const std::vector<MedianPlaneEntry>& entries);
// One file per frequency: hpd_{ear}_{Hz}.csv under `dir`; returns the paths.
std::vector<std::string> write_hpd_csvs(const std::string& dir, const HpdPattern& pattern);

}  // namespace hrtfkit::cues
