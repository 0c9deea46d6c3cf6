#pragma once

// Deterministic signal primitives shared by the pipeline and cue modules.
// Everything here is a pure function of its arguments and may be called from
// any number of threads.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace hrtfkit {

inline constexpr double kDefaultSampleRate = 48000.0;
inline constexpr std::size_t kHrirLength = 512;
inline constexpr std::size_t kRawLength = 4096;

struct ImpulseResponse {
  std::vector<double> samples;
  double sample_rate = kDefaultSampleRate;
  // Position of the first sample relative to the excitation (window start).
  int t0_offset = 0;

  std::size_t size() const { return samples.size(); }
  double operator[](std::size_t i) const { return samples[i]; }
};

struct Spectrum {
  // Full N-point DFT, bins 0..N-1.
  std::vector<std::complex<double>> bins;
  double bin_spacing = 0.0;  // Hz

  std::size_t size() const { return bins.size(); }
  double frequency(std::size_t k) const { return static_cast<double>(k) * bin_spacing; }
};

// Unnormalised forward DFT; bin_spacing = sample_rate / N.
Spectrum forward_transform(const ImpulseResponse& ir);

// Inverse DFT (1/N scaling). Throws DataError when the spectrum is not
// conjugate-symmetric to within 1e-9 of its peak magnitude.
ImpulseResponse inverse_transform(const Spectrum& sp);

// out[n] = in[(n - m) mod N], 0 <= m < N.
ImpulseResponse circular_shift(const ImpulseResponse& ir, int m);

// Appends zeros up to `length` samples; throws if the IR is already longer.
ImpulseResponse zero_pad(const ImpulseResponse& ir, std::size_t length);

// Index of the largest |sample|; ties resolve to the smaller index.
std::size_t peak_index(const ImpulseResponse& ir);

// Smallest i >= start + min_gap where the sign flips between i-1 and i, or
// where ir[i] is exactly zero.
std::size_t first_zero_crossing_after(const ImpulseResponse& ir, std::size_t start,
                                      std::size_t min_gap);

// Hann window of `length` taps with its unit-gain tap at length/2.
std::vector<double> hann_window(int length);

// out[k] = ir[center - length/2 + k] * w[k]; samples outside the buffer are 0.
ImpulseResponse hann_window_segment(const ImpulseResponse& ir, long center, int length);

// The fixed ITD pre-filter: 255-tap Hamming-windowed sinc, 1.5 kHz cutoff at
// 48 kHz, unit DC gain. Exposed so tests can inspect the response.
const std::vector<double>& itd_lowpass_taps();

// Delay-compensated ("same"-length) convolution with itd_lowpass_taps().
ImpulseResponse lowpass_for_itd(const ImpulseResponse& ir);

// Band-limited 4x interpolation by spectral zero-padding.
ImpulseResponse upsample_4x(const ImpulseResponse& ir);

struct XcorrPeak {
  int lag_samples = 0;
  double lag_seconds = 0.0;
  double coefficient = 0.0;  // normalised correlation at the peak
};

// Delay of `b` relative to `a`: argmax over |tau| <= max_lag of
// sum_n a[n] * b[n + tau] / sqrt(sum a^2 * sum b^2). Positive when b lags a.
// Ties go to the smaller |tau|, then to the negative lag.
XcorrPeak normalized_xcorr_peak(const ImpulseResponse& a, const ImpulseResponse& b,
                                double max_lag_seconds);

// 20*log10(|X|) per bin.
std::vector<double> magnitude_db(const Spectrum& sp);

double energy(std::span<const double> x);

}  // namespace hrtfkit
