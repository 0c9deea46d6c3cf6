#include "hrtfkit/localization_cues.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <utility>

#include "hrtfkit/error.hpp"

namespace hrtfkit::cues {
namespace {

// Zeros on both sides keep the low-pass and the spectral upsampler from
// wrapping content that sits near either end of the 512-sample buffer.
constexpr std::size_t kItdGuard = 128;

ImpulseResponse guard_pad(const ImpulseResponse& h) {
  ImpulseResponse out;
  out.sample_rate = h.sample_rate;
  out.samples.assign(h.size() + 2 * kItdGuard, 0.0);
  std::copy(h.samples.begin(), h.samples.end(), out.samples.begin() + kItdGuard);
  return out;
}

Spectrum padded_spectrum(const ImpulseResponse& h) {
  if (h.samples.empty()) throw PreconditionError("empty impulse response");
  if (h.size() > kCueFftLength) {
    throw PreconditionError("impulse response longer than the " + std::to_string(kCueFftLength) +
                            "-point cue transform");
  }
  return forward_transform(zero_pad(h, kCueFftLength));
}

// HRIRs are circular (512-periodic) objects: the non-causality shift is a
// rotation. Before zero-padding, rotate both channels together so that the
// circular energy centroid of the pair lands mid-buffer. The rotation follows
// any common circular shift of the input, so ILDs do not depend on where the
// buffer happens to start, and a compact response is never split by the wrap.
std::pair<ImpulseResponse, ImpulseResponse> centred_pair(const ImpulseResponse& left,
                                                         const ImpulseResponse& right) {
  if (left.size() != right.size() || left.sample_rate != right.sample_rate) {
    throw PreconditionError("ILD: channels differ in length or rate");
  }
  const std::size_t n = left.size();
  if (n == 0) throw PreconditionError("empty impulse response");
  std::complex<double> z{0.0, 0.0};
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = left[i] * left[i] + right[i] * right[i];
    z += e * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    total += e;
  }
  if (!(std::abs(z) > 1e-9 * total)) return {left, right};
  const long len = static_cast<long>(n);
  const long centroid = std::lround(std::arg(z) * static_cast<double>(n) / (2.0 * std::numbers::pi));
  const long shift = ((len / 2 - centroid) % len + len) % len;
  return {circular_shift(left, static_cast<int>(shift)), circular_shift(right, static_cast<int>(shift))};
}

// Integral of a piecewise-linear function sampled every `df` Hz, restricted to
// [lo, hi].
double trapezoid(const std::vector<double>& y, double df, double lo, double hi) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < y.size(); ++k) {
    const double f0 = k * df;
    const double f1 = (k + 1) * df;
    const double a = std::max(f0, lo);
    const double b = std::min(f1, hi);
    if (!(a < b)) continue;
    const double ya = y[k] + (y[k + 1] - y[k]) * (a - f0) / df;
    const double yb = y[k] + (y[k + 1] - y[k]) * (b - f0) / df;
    acc += 0.5 * (b - a) * (ya + yb);
  }
  return acc;
}

std::vector<Direction> keys_of(const HrirDatabase& db) {
  std::vector<Direction> dirs;
  dirs.reserve(db.hrir.size());
  for (const auto& kv : db.hrir) dirs.push_back(kv.first);
  return dirs;
}

// Topographic prominence of s[k] as a maximum (sign = +1) or minimum (-1).
double prominence(const std::vector<double>& s, std::size_t k, double sign) {
  const double v = sign * s[k];
  auto base = [&](long step) {
    double lowest = v;
    for (long j = static_cast<long>(k) + step; j >= 0 && j < static_cast<long>(s.size()); j += step) {
      const double u = sign * s[static_cast<std::size_t>(j)];
      if (u > v) break;
      lowest = std::min(lowest, u);
    }
    return lowest;
  };
  return v - std::max(base(-1), base(+1));
}

}  // namespace

double itd_resolution(double sample_rate) { return 1.0 / (4.0 * sample_rate); }

double compute_itd(const ImpulseResponse& left, const ImpulseResponse& right) {
  if (left.size() != right.size() || left.sample_rate != right.sample_rate) {
    throw PreconditionError("compute_itd: channels differ in length or rate");
  }
  if (energy(left.samples) == 0.0 || energy(right.samples) == 0.0) {
    throw DataError("compute_itd: all-zero channel");
  }
  const ImpulseResponse l = upsample_4x(lowpass_for_itd(guard_pad(left)));
  const ImpulseResponse r = upsample_4x(lowpass_for_itd(guard_pad(right)));
  return normalized_xcorr_peak(r, l, kItdMaxLag).lag_seconds;
}

ItdMap itd_map(const HrirDatabase& db) {
  const auto dirs = keys_of(db);
  std::vector<double> values(dirs.size());
  std::vector<std::string> errors(dirs.size());
  const long n = static_cast<long>(dirs.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      const auto& pair = db.hrir.at(dirs[k]);
      values[k] = compute_itd(pair.left, pair.right);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }
  ItdMap out;
  out.resolution = itd_resolution(db.meta.sample_rate);
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    if (!errors[k].empty()) throw DataError("ITD at " + to_string(dirs[k]) + ": " + errors[k]);
    out.values.emplace(dirs[k], values[k]);
  }
  return out;
}

ItdMap itd_map_serial(const HrirDatabase& db) {
  ItdMap out;
  out.resolution = itd_resolution(db.meta.sample_rate);
  for (const auto& [d, pair] : db.hrir) {
    try {
      out.values.emplace(d, compute_itd(pair.left, pair.right));
    } catch (const std::exception& e) {
      throw DataError("ITD at " + to_string(d) + ": " + e.what());
    }
  }
  return out;
}

NarrowbandIld ild_narrowband(const ImpulseResponse& left, const ImpulseResponse& right) {
  const auto [cl, cr] = centred_pair(left, right);
  const Spectrum l = padded_spectrum(cl);
  const Spectrum r = padded_spectrum(cr);
  const std::size_t half = kCueFftLength / 2;
  double peak_l = 0.0;
  double peak_r = 0.0;
  for (std::size_t k = 0; k <= half; ++k) {
    peak_l = std::max(peak_l, std::abs(l.bins[k]));
    peak_r = std::max(peak_r, std::abs(r.bins[k]));
  }
  if (peak_l == 0.0 || peak_r == 0.0) throw DataError("ild_narrowband: all-zero channel");
  NarrowbandIld out;
  out.bin_spacing = l.bin_spacing;
  for (std::size_t k = 0; k <= half; ++k) {
    const double ml = std::abs(l.bins[k]);
    const double mr = std::abs(r.bins[k]);
    const bool flag = ml < 1e-6 * peak_l || mr < 1e-6 * peak_r;
    out.frequencies.push_back(l.frequency(k));
    out.flagged.push_back(flag);
    out.db.push_back(flag ? std::numeric_limits<double>::quiet_NaN() : 20.0 * std::log10(mr / ml));
  }
  return out;
}

double ild_wideband(const ImpulseResponse& left, const ImpulseResponse& right, double f_lo,
                    double f_hi) {
  if (!(f_hi > f_lo) || f_lo < 0.0) throw PreconditionError("ild_wideband: need 0 <= f_lo < f_hi");
  const auto [cl, cr] = centred_pair(left, right);
  const Spectrum l = padded_spectrum(cl);
  const Spectrum r = padded_spectrum(cr);
  const std::size_t half = kCueFftLength / 2;
  std::vector<double> pl(half + 1);
  std::vector<double> pr(half + 1);
  for (std::size_t k = 0; k <= half; ++k) {
    pl[k] = std::norm(l.bins[k]);
    pr[k] = std::norm(r.bins[k]);
  }
  const double el = trapezoid(pl, l.bin_spacing, f_lo, f_hi);
  const double er = trapezoid(pr, r.bin_spacing, f_lo, f_hi);
  if (el == 0.0) throw DataError("ild_wideband: left-ear energy is zero in band");
  if (er == 0.0) throw DataError("ild_wideband: right-ear energy is zero in band");
  return 10.0 * std::log10(er / el);
}

std::map<Direction, double> ild_wideband_map(const HrirDatabase& db) {
  const auto dirs = keys_of(db);
  std::vector<double> values(dirs.size());
  std::vector<std::string> errors(dirs.size());
  const long n = static_cast<long>(dirs.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      const auto& pair = db.hrir.at(dirs[k]);
      values[k] = ild_wideband(pair.left, pair.right);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }
  std::map<Direction, double> out;
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    if (!errors[k].empty()) throw DataError("ILD at " + to_string(dirs[k]) + ": " + errors[k]);
    out.emplace(dirs[k], values[k]);
  }
  return out;
}

Spectrum extract_prtf(const ImpulseResponse& hrir, int window_length) {
  const std::size_t peak = peak_index(hrir);
  ImpulseResponse seg = hann_window_segment(hrir, static_cast<long>(peak), window_length);
  return padded_spectrum(seg);
}

std::vector<double> smoothed_db(const Spectrum& sp, int smoothing_bins) {
  if (smoothing_bins < 1) throw PreconditionError("smoothing width must be >= 1");
  const std::size_t n = sp.size() / 2 + 1;
  double peak = 0.0;
  for (std::size_t k = 0; k < n; ++k) peak = std::max(peak, std::abs(sp.bins[k]));
  if (peak == 0.0) throw DataError("spectrum is identically zero");
  std::vector<double> db(n);
  for (std::size_t k = 0; k < n; ++k) {
    db[k] = 20.0 * std::log10(std::max(std::abs(sp.bins[k]), 1e-15 * peak));
  }
  const long half = smoothing_bins / 2;
  std::vector<double> out(n);
  for (long k = 0; k < static_cast<long>(n); ++k) {
    const long a = std::max(0L, k - half);
    const long b = std::min(static_cast<long>(n) - 1, k + half);
    double acc = 0.0;
    for (long j = a; j <= b; ++j) acc += db[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(k)] = acc / static_cast<double>(b - a + 1);
  }
  return out;
}

SpectralFeatures find_spectral_features(const Spectrum& prtf, const FeatureSearch& search) {
  if (!(search.f_hi > search.f_lo) || search.neighborhood_bins < 1) {
    throw PreconditionError("find_spectral_features: bad search band or neighbourhood");
  }
  const std::vector<double> s = smoothed_db(prtf, search.smoothing_bins);
  const double df = prtf.bin_spacing;
  const long n = static_cast<long>(s.size());
  const long k_lo = std::max(1L, static_cast<long>(std::ceil(search.f_lo / df - 1e-9)));
  const long k_hi = std::min(n - 2, static_cast<long>(std::floor(search.f_hi / df + 1e-9)));
  SpectralFeatures out;
  for (long k = k_lo; k <= k_hi; ++k) {
    const long a = std::max(0L, k - search.neighborhood_bins);
    const long b = std::min(n - 1, k + search.neighborhood_bins);
    const double v = s[static_cast<std::size_t>(k)];
    // Strict on the left, non-strict on the right: a flat top reports its
    // first bin only.
    bool is_max = true;
    bool is_min = true;
    for (long j = a; j <= b && (is_max || is_min); ++j) {
      if (j == k) continue;
      const double u = s[static_cast<std::size_t>(j)];
      if (j < k ? u >= v : u > v) is_max = false;
      if (j < k ? u <= v : u < v) is_min = false;
    }
    if (is_max) {
      const double p = prominence(s, static_cast<std::size_t>(k), +1.0);
      if (p >= search.min_prominence_db) out.peaks.push_back({k * df, v, p});
    }
    if (is_min) {
      const double p = prominence(s, static_cast<std::size_t>(k), -1.0);
      if (p >= search.min_prominence_db) out.notches.push_back({k * df, v, p});
    }
  }
  return out;
}

double median_plane_extended_elevation(const Direction& d) {
  if (d.azimuth_deg == 0) return d.elevation_deg;
  if (d.azimuth_deg == 180) return 180.0 - d.elevation_deg;
  throw PreconditionError("direction " + to_string(d) + " is not in the median plane");
}

std::vector<MedianPlaneEntry> median_plane_features(const HrirDatabase& db, Ear ear,
                                                    const FeatureSearch& search) {
  std::vector<MedianPlaneEntry> out;
  for (const auto& [d, pair] : db.hrir) {
    if (d.azimuth_deg != 0 && d.azimuth_deg != 180) continue;
    if (d.azimuth_deg == 180 && d.elevation_deg == 90) continue;
    MedianPlaneEntry e;
    e.direction = d;
    e.extended_elevation = median_plane_extended_elevation(d);
    e.features = find_spectral_features(extract_prtf(pair.ear(ear)), search);
    out.push_back(std::move(e));
  }
  if (out.empty()) throw DataError("database has no median-plane directions");
  std::sort(out.begin(), out.end(), [](const MedianPlaneEntry& a, const MedianPlaneEntry& b) {
    return a.extended_elevation < b.extended_elevation;
  });
  return out;
}

HpdPattern hpd(const HrirDatabase& db, Ear ear, const std::vector<double>& frequencies) {
  const Direction front{0, 0};
  if (!db.hrir.count(front)) throw DataError("HPD needs the frontal direction (0, 0)");
  HpdPattern out;
  out.ear = ear;
  out.frequencies = frequencies;
  std::vector<Spectrum> spectra;
  std::size_t front_index = 0;
  for (const auto& [d, pair] : db.hrir) {
    if (d.elevation_deg != 0) continue;
    if (d == front) front_index = spectra.size();
    out.azimuths.push_back(d.azimuth_deg);
    spectra.push_back(padded_spectrum(pair.ear(ear)));
  }
  const double df = spectra.front().bin_spacing;
  for (double f : frequencies) {
    if (!(f >= 0.0) || f > db.meta.sample_rate / 2.0) {
      throw PreconditionError("HPD frequency outside 0..Nyquist");
    }
    const auto k = static_cast<std::size_t>(std::lround(f / df));
    out.bin_frequencies.push_back(k * df);
    const double ref = std::abs(spectra[front_index].bins[k]);
    if (ref == 0.0) throw DataError("frontal HRTF is zero at " + std::to_string(f) + " Hz");
    std::vector<double> row;
    row.reserve(spectra.size());
    for (const auto& sp : spectra) row.push_back(20.0 * std::log10(std::abs(sp.bins[k]) / ref));
    out.db.push_back(std::move(row));
  }
  return out;
}

}  // namespace hrtfkit::cues
