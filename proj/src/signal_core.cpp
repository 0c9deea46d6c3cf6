#include "hrtfkit/signal_core.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>

#include "hrtfkit/error.hpp"

namespace hrtfkit {
namespace {

// FFTW's planner is not re-entrant, but executing an existing plan on new
// arrays is. Plans are created once per (size, direction) and never freed.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<std::complex<double>> in(static_cast<std::size_t>(n));
    std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
    fftw_plan plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()), sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw Error("fftw: could not create plan of size " + std::to_string(n));
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

std::vector<std::complex<double>> dft(std::vector<std::complex<double>> in, int sign) {
  const int n = static_cast<int>(in.size());
  std::vector<std::complex<double>> out(in.size());
  fftw_plan plan = PlanCache::instance().get(n, sign);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

Spectrum forward_transform(const ImpulseResponse& ir) {
  if (ir.samples.empty()) throw PreconditionError("forward_transform: empty impulse response");
  if (!(ir.sample_rate > 0.0)) throw PreconditionError("forward_transform: sample rate must be positive");
  std::vector<std::complex<double>> in(ir.samples.begin(), ir.samples.end());
  Spectrum sp;
  sp.bins = dft(std::move(in), FFTW_FORWARD);
  sp.bin_spacing = ir.sample_rate / static_cast<double>(ir.size());
  return sp;
}

ImpulseResponse inverse_transform(const Spectrum& sp) {
  const std::size_t n = sp.size();
  if (n == 0) throw PreconditionError("inverse_transform: empty spectrum");
  double peak = 0.0;
  for (const auto& b : sp.bins) peak = std::max(peak, std::abs(b));
  double asym = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    asym = std::max(asym, std::abs(sp.bins[k] - std::conj(sp.bins[(n - k) % n])));
  }
  if (asym > 1e-9 * peak) {
    throw DataError("inverse_transform: spectrum is not conjugate-symmetric (residue " +
                    std::to_string(asym / peak) + " of peak)");
  }
  auto out = dft(sp.bins, FFTW_BACKWARD);
  ImpulseResponse ir;
  ir.sample_rate = sp.bin_spacing * static_cast<double>(n);
  ir.samples.resize(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) ir.samples[i] = out[i].real() * scale;
  return ir;
}

ImpulseResponse circular_shift(const ImpulseResponse& ir, int m) {
  const auto n = static_cast<long>(ir.size());
  if (m < 0 || m >= n) {
    throw PreconditionError("circular_shift: shift " + std::to_string(m) + " outside [0, " +
                            std::to_string(n) + ")");
  }
  ImpulseResponse out = ir;
  std::rotate_copy(ir.samples.begin(), ir.samples.end() - m, ir.samples.end(), out.samples.begin());
  return out;
}

ImpulseResponse zero_pad(const ImpulseResponse& ir, std::size_t length) {
  if (length < ir.size()) throw PreconditionError("zero_pad: target shorter than input");
  ImpulseResponse out = ir;
  out.samples.resize(length, 0.0);
  return out;
}

std::size_t peak_index(const ImpulseResponse& ir) {
  if (ir.samples.empty()) throw PreconditionError("peak_index: empty impulse response");
  std::size_t best = 0;
  double best_mag = std::abs(ir.samples[0]);
  for (std::size_t i = 1; i < ir.size(); ++i) {
    const double mag = std::abs(ir.samples[i]);
    if (mag > best_mag) {
      best = i;
      best_mag = mag;
    }
  }
  if (best_mag == 0.0) throw DataError("peak_index: impulse response is all zero");
  return best;
}

std::size_t first_zero_crossing_after(const ImpulseResponse& ir, std::size_t start,
                                      std::size_t min_gap) {
  const std::size_t first = start + min_gap;
  if (first >= ir.size()) {
    throw PreconditionError("first_zero_crossing_after: start + gap beyond buffer");
  }
  if (first == 0 && ir.samples[0] == 0.0) return 0;
  for (std::size_t i = std::max<std::size_t>(first, 1); i < ir.size(); ++i) {
    if (ir.samples[i] == 0.0 || sign_of(ir.samples[i - 1]) != sign_of(ir.samples[i])) return i;
  }
  throw DataError("first_zero_crossing_after: no zero crossing before end of buffer");
}

std::vector<double> hann_window(int length) {
  if (length <= 0) throw PreconditionError("hann_window: length must be positive");
  std::vector<double> w(static_cast<std::size_t>(length));
  // Even lengths use the periodic form (w[L/2] == 1); odd lengths the
  // symmetric form over L+1 points so the centre tap is also exactly 1.
  const bool even = length % 2 == 0;
  const double denom = even ? length : length + 1;
  const double offset = even ? 0.0 : 1.0;
  for (int k = 0; k < length; ++k) {
    w[static_cast<std::size_t>(k)] =
        0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * (k + offset) / denom));
  }
  return w;
}

ImpulseResponse hann_window_segment(const ImpulseResponse& ir, long center, int length) {
  const auto w = hann_window(length);
  ImpulseResponse out;
  out.sample_rate = ir.sample_rate;
  out.samples.assign(static_cast<std::size_t>(length), 0.0);
  const long first = center - length / 2;
  out.t0_offset = ir.t0_offset + static_cast<int>(first);
  for (long k = 0; k < length; ++k) {
    const long src = first + k;
    if (src >= 0 && src < static_cast<long>(ir.size())) {
      out.samples[static_cast<std::size_t>(k)] =
          ir.samples[static_cast<std::size_t>(src)] * w[static_cast<std::size_t>(k)];
    }
  }
  return out;
}

const std::vector<double>& itd_lowpass_taps() {
  static const std::vector<double> taps = [] {
    constexpr int kTaps = 255;
    constexpr double kCutoff = 1500.0;
    constexpr double kRate = kDefaultSampleRate;
    constexpr int kMid = kTaps / 2;
    const double fc = kCutoff / kRate;  // cycles per sample
    std::vector<double> h(kTaps);
    for (int n = 0; n < kTaps; ++n) {
      const int t = n - kMid;
      const double sinc =
          t == 0 ? 2.0 * fc : std::sin(2.0 * std::numbers::pi * fc * t) / (std::numbers::pi * t);
      const double hamming = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (kTaps - 1));
      h[static_cast<std::size_t>(n)] = sinc * hamming;
    }
    const double dc = std::accumulate(h.begin(), h.end(), 0.0);
    for (auto& v : h) v /= dc;
    return h;
  }();
  return taps;
}

ImpulseResponse lowpass_for_itd(const ImpulseResponse& ir) {
  if (ir.samples.empty()) throw PreconditionError("lowpass_for_itd: empty impulse response");
  const auto& h = itd_lowpass_taps();
  const long mid = static_cast<long>(h.size() / 2);
  const long n = static_cast<long>(ir.size());
  ImpulseResponse out = ir;
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    // out[i] = sum_k h[k] * x[i + mid - k]
    const long k_lo = std::max(0L, i + mid - (n - 1));
    const long k_hi = std::min(static_cast<long>(h.size()) - 1, i + mid);
    for (long k = k_lo; k <= k_hi; ++k) {
      acc += h[static_cast<std::size_t>(k)] * ir.samples[static_cast<std::size_t>(i + mid - k)];
    }
    out.samples[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

ImpulseResponse upsample_4x(const ImpulseResponse& ir) {
  constexpr std::size_t kFactor = 4;
  const Spectrum sp = forward_transform(ir);
  const std::size_t n = sp.size();
  const std::size_t m = n * kFactor;
  std::vector<std::complex<double>> up(m, {0.0, 0.0});
  const std::size_t half = n / 2;
  if (n % 2 == 0) {
    for (std::size_t k = 0; k < half; ++k) up[k] = sp.bins[k];
    for (std::size_t k = half + 1; k < n; ++k) up[m - n + k] = sp.bins[k];
    // Split the Nyquist bin so the interpolant stays real.
    up[half] = 0.5 * sp.bins[half];
    up[m - half] = 0.5 * sp.bins[half];
  } else {
    for (std::size_t k = 0; k <= half; ++k) up[k] = sp.bins[k];
    for (std::size_t k = half + 1; k < n; ++k) up[m - n + k] = sp.bins[k];
  }
  Spectrum usp{std::move(up), sp.bin_spacing};
  ImpulseResponse out = inverse_transform(usp);
  for (auto& v : out.samples) v *= static_cast<double>(kFactor);
  out.sample_rate = ir.sample_rate * kFactor;
  out.t0_offset = ir.t0_offset * static_cast<int>(kFactor);
  return out;
}

XcorrPeak normalized_xcorr_peak(const ImpulseResponse& a, const ImpulseResponse& b,
                                double max_lag_seconds) {
  if (a.size() != b.size() || a.sample_rate != b.sample_rate) {
    throw PreconditionError("normalized_xcorr_peak: inputs differ in length or rate");
  }
  const double ea = energy(a.samples);
  const double eb = energy(b.samples);
  if (ea == 0.0 || eb == 0.0) throw DataError("normalized_xcorr_peak: all-zero input");
  const long n = static_cast<long>(a.size());
  const long max_lag =
      std::min(n - 1, static_cast<long>(std::floor(max_lag_seconds * a.sample_rate + 1e-9)));

  auto corr = [&](long tau) {
    double acc = 0.0;
    const long lo = std::max(0L, -tau);
    const long hi = std::min(n, n - tau);
    for (long i = lo; i < hi; ++i) {
      acc += a.samples[static_cast<std::size_t>(i)] * b.samples[static_cast<std::size_t>(i + tau)];
    }
    return acc;
  };

  // Visit 0, -1, +1, -2, +2, ... and only accept strict improvements, which
  // realises the tie-break order.
  long best_tau = 0;
  double best = corr(0);
  for (long d = 1; d <= max_lag; ++d) {
    for (long tau : {-d, d}) {
      const double c = corr(tau);
      if (c > best) {
        best = c;
        best_tau = tau;
      }
    }
  }
  XcorrPeak peak;
  peak.lag_samples = static_cast<int>(best_tau);
  peak.lag_seconds = static_cast<double>(best_tau) / a.sample_rate;
  peak.coefficient = best / std::sqrt(ea * eb);
  return peak;
}

std::vector<double> magnitude_db(const Spectrum& sp) {
  std::vector<double> db(sp.size());
  std::transform(sp.bins.begin(), sp.bins.end(), db.begin(),
                 [](const std::complex<double>& x) { return 20.0 * std::log10(std::abs(x)); });
  return db;
}

double energy(std::span<const double> x) {
  return std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
}

}  // namespace hrtfkit
