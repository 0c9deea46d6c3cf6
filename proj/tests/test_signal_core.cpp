#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "hrtfkit/error.hpp"
#include "hrtfkit/signal_core.hpp"
#include "hrtfkit/synth_oracle.hpp"

using namespace hrtfkit;
using std::numbers::pi;

namespace {

ImpulseResponse make_ir(std::vector<double> s, double fs = kDefaultSampleRate) {
  ImpulseResponse ir;
  ir.samples = std::move(s);
  ir.sample_rate = fs;
  return ir;
}

ImpulseResponse delta(std::size_t n, std::size_t at, double fs = kDefaultSampleRate) {
  std::vector<double> s(n, 0.0);
  s[at] = 1.0;
  return make_ir(std::move(s), fs);
}

ImpulseResponse random_ir(std::size_t n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> g;
  std::vector<double> s(n);
  for (auto& v : s) v = g(gen);
  return make_ir(std::move(s));
}

ImpulseResponse sine(std::size_t n, double f, double fs = kDefaultSampleRate) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = std::sin(2.0 * pi * f * static_cast<double>(i) / fs);
  return make_ir(std::move(s), fs);
}

// Smooth band-limited pulse centred at `c` (fractional allowed).
ImpulseResponse gauss_pulse(std::size_t n, double c, double sigma) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = (static_cast<double>(i) - c) / sigma;
    s[i] = std::exp(-0.5 * t * t);
  }
  return make_ir(std::move(s));
}

double rms(const std::vector<double>& x, std::size_t from, std::size_t to) {
  double acc = 0.0;
  for (std::size_t i = from; i < to; ++i) acc += x[i] * x[i];
  return std::sqrt(acc / static_cast<double>(to - from));
}

// Exhaustive integer-lag scan, written independently of the library.
int brute_force_lag(const std::vector<double>& a, const std::vector<double>& b, int max_lag) {
  double ea = 0.0, eb = 0.0;
  for (double v : a) ea += v * v;
  for (double v : b) eb += v * v;
  const int n = static_cast<int>(a.size());
  int best = 0;
  double best_v = -2.0;
  for (int mag = 0; mag <= max_lag; ++mag) {
    for (int tau : {-mag, mag}) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        const int j = i + tau;
        if (j >= 0 && j < n) acc += a[i] * b[j];
      }
      const double v = acc / std::sqrt(ea * eb);
      if (v > best_v) {
        best_v = v;
        best = tau;
      }
      if (mag == 0) break;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("forward transform of a delta at 0 is flat") {
  const Spectrum sp = forward_transform(delta(512, 0));
  CHECK(sp.size() == 512);
  for (const auto& b : sp.bins) {
    CHECK(b.real() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(b.imag()) < 1e-14);
  }
}

TEST_CASE("shift theorem: delta at d has phase -2 pi k d / N") {
  const std::size_t n = 512, d = 37;
  const Spectrum sp = forward_transform(delta(n, d));
  for (std::size_t k = 0; k < n; ++k) {
    const double ph = -2.0 * pi * static_cast<double>(k * d % n) / static_cast<double>(n);
    CHECK(std::abs(sp.bins[k] - std::polar(1.0, ph)) < 1e-12);
  }
}

TEST_CASE("forward transform agrees with a naive DFT") {
  const auto x = random_ir(96, 7);
  const auto ref = fixtures::naive_dft(x.samples);
  const Spectrum sp = forward_transform(x);
  for (std::size_t k = 0; k < ref.size(); ++k) CHECK(std::abs(sp.bins[k] - ref[k]) < 1e-10);
}

TEST_CASE("Parseval holds for a random 512-sample signal") {
  const auto x = random_ir(512, 3);
  const Spectrum sp = forward_transform(x);
  double et = 0.0, ef = 0.0;
  for (double v : x.samples) et += v * v;
  for (const auto& b : sp.bins) ef += std::norm(b);
  CHECK(std::abs(et - ef / 512.0) / et < 1e-9);
}

TEST_CASE("bin spacing is 93.75 Hz for 512 samples at 48 kHz") {
  CHECK(forward_transform(delta(512, 0)).bin_spacing == 93.75);
  CHECK(forward_transform(delta(4800, 0)).bin_spacing == 10.0);
}

TEST_CASE("inverse transform: all-ones gives a delta, linear phase gives a shifted delta") {
  Spectrum ones;
  ones.bins.assign(512, {1.0, 0.0});
  ones.bin_spacing = 93.75;
  const auto d0 = inverse_transform(ones);
  CHECK(d0.sample_rate == 48000.0);
  CHECK(d0[0] == doctest::Approx(1.0));
  for (std::size_t i = 1; i < 512; ++i) CHECK(std::abs(d0[i]) < 1e-14);

  Spectrum lin = ones;
  for (std::size_t k = 0; k < 512; ++k) lin.bins[k] = std::polar(1.0, -2.0 * pi * (k * 10 % 512) / 512.0);
  const auto d10 = inverse_transform(lin);
  CHECK(peak_index(d10) == 10);
  CHECK(d10[10] == doctest::Approx(1.0));
}

TEST_CASE("inverse transform rejects a non-Hermitian spectrum") {
  Spectrum sp;
  sp.bins.assign(16, {0.0, 0.0});
  sp.bins[1] = {1.0, 0.0};
  sp.bin_spacing = 3000.0;
  CHECK_THROWS_AS(inverse_transform(sp), DataError);
}

TEST_CASE("property: round trip is the identity for lengths 512, 4096, 4800") {
  for (std::size_t n : {512u, 4096u, 4800u}) {
    for (unsigned seed = 0; seed < 3; ++seed) {
      const auto x = random_ir(n, seed + 11 * static_cast<unsigned>(n));
      const auto y = inverse_transform(forward_transform(x));
      double peak = 0.0, err = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        peak = std::max(peak, std::abs(x[i]));
        err = std::max(err, std::abs(x[i] - y[i]));
      }
      CHECK(err < 1e-9 * peak);
    }
  }
}

TEST_CASE("circular shift examples") {
  const auto x = random_ir(512, 5);
  CHECK(circular_shift(x, 0).samples == x.samples);
  CHECK(peak_index(circular_shift(delta(512, 500), 48)) == 36);
  CHECK_THROWS_AS(circular_shift(x, 512), PreconditionError);
  CHECK_THROWS_AS(circular_shift(x, -1), PreconditionError);
}

TEST_CASE("property: circular shifts compose exactly and keep bin magnitudes") {
  std::mt19937 gen(99);
  std::uniform_int_distribution<int> pick(0, 511);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_ir(512, 100 + static_cast<unsigned>(trial));
    const int a = pick(gen), b = pick(gen);
    CHECK(circular_shift(circular_shift(x, a), b).samples == circular_shift(x, (a + b) % 512).samples);
    const auto m0 = forward_transform(x);
    const auto m1 = forward_transform(circular_shift(x, a));
    for (std::size_t k = 0; k < 512; ++k) {
      CHECK(std::abs(std::abs(m0.bins[k]) - std::abs(m1.bins[k])) <= 1e-9 * std::max(1.0, std::abs(m0.bins[k])));
    }
  }
}

TEST_CASE("peak index uses |x| and resolves ties to the smaller index") {
  CHECK(peak_index(make_ir({0, 3, -5, 2})) == 2);
  CHECK(peak_index(make_ir({0, 5, -5, 0})) == 1);
  CHECK_THROWS_AS(peak_index(make_ir({0, 0, 0})), DataError);
}

TEST_CASE("peak of a synthetic ipsilateral BIR sits at the geometric path delay") {
  const synth::SynthOptions opt;
  const auto bir = synth::synth_bir(Direction::make(90, 0), opt, synth::SpeakerColoration::flat());
  const auto& m = opt.model;
  const long expected = std::lround((m.source_distance - m.head_radius) / m.speed_of_sound * m.sample_rate);
  CHECK(static_cast<long>(peak_index(bir.right)) == expected);
}

TEST_CASE("zero crossing search") {
  // sin(5 pi) evaluates to ~6e-16; snap rounding residue so the exact zero
  // at sample 120 is represented as such.
  auto s = sine(4096, 1000.0);
  for (auto& v : s.samples) v = std::abs(v) < 1e-12 ? 0.0 : v;
  CHECK(first_zero_crossing_after(s, 0, 120) == 120);
  std::vector<double> decay(600);
  for (std::size_t i = 0; i < decay.size(); ++i) decay[i] = std::exp(-0.01 * static_cast<double>(i));
  CHECK_THROWS_AS(first_zero_crossing_after(make_ir(decay), 0, 120), DataError);
  CHECK_THROWS_AS(first_zero_crossing_after(make_ir(decay), 500, 120), PreconditionError);
}

TEST_CASE("zero crossing of a reflected BIR comes before the reflection") {
  synth::SynthOptions opt;
  opt.reflection = synth::ReflectionSpec{288, 0.3};  // 6 ms
  const auto d = Direction::make(30, 0);
  const auto bir = synth::synth_bir(d, opt, synth::SpeakerColoration::sealed_module());
  const auto truth = synth::truth_table(opt);
  long reflection = -1;
  for (const auto& row : truth) {
    if (row.direction == d) reflection = row.reflection_sample;
  }
  REQUIRE(reflection > 0);
  const std::size_t peak = peak_index(bir.right);
  const std::size_t end = first_zero_crossing_after(bir.right, peak, 120);
  CHECK(static_cast<long>(end) < reflection);
}

TEST_CASE("Hann segment examples") {
  const auto w = hann_window(96);
  CHECK(w[48] == 1.0);
  CHECK(w[0] == 0.0);
  const auto ones = make_ir(std::vector<double>(400, 1.0));
  const auto seg = hann_window_segment(ones, 200, 96);
  REQUIRE(seg.size() == 96);
  for (std::size_t k = 0; k < 96; ++k) {
    CHECK(seg[k] == doctest::Approx(0.5 - 0.5 * std::cos(2.0 * pi * static_cast<double>(k) / 96.0)));
  }
  const auto ds = hann_window_segment(delta(400, 200), 200, 96);
  CHECK(ds[48] == w[48]);
  CHECK(peak_index(ds) == 48);
  // Segment running off the start of the buffer is zero-filled.
  const auto edge = hann_window_segment(ones, 10, 96);
  CHECK(edge[0] == 0.0);
  CHECK(edge[37] == 0.0);
  CHECK(edge[38] > 0.0);
}

TEST_CASE("windowed two-path IR shows the comb notch at 1/(2 t0)") {
  // delta(t) + 0.5 delta(t - t0), t0 = 0.25 ms = 12 samples -> null at 2 kHz.
  std::vector<double> s(400, 0.0);
  s[200] = 1.0;
  s[212] = 0.5;
  auto seg = hann_window_segment(make_ir(s), 206, 96);
  const auto sp = forward_transform(zero_pad(seg, 4800));
  // Search the first minimum of |X| between 500 Hz and 4 kHz.
  std::size_t best = 50;
  for (std::size_t k = 50; k <= 400; ++k) {
    if (std::abs(sp.bins[k]) < std::abs(sp.bins[best])) best = k;
  }
  CHECK(std::abs(sp.frequency(best) - 2000.0) <= sp.bin_spacing);
}

TEST_CASE("ITD low-pass: unity DC gain and >= 40 dB at 6 kHz") {
  double dc = 0.0;
  for (double t : itd_lowpass_taps()) dc += t;
  CHECK(itd_lowpass_taps().size() == 255);
  CHECK(std::abs(20.0 * std::log10(dc)) < 0.1);

  const auto flat = lowpass_for_itd(make_ir(std::vector<double>(1024, 1.0)));
  CHECK(std::abs(20.0 * std::log10(flat[512])) < 0.1);

  const auto x = sine(4096, 6000.0);
  const auto y = lowpass_for_itd(x);
  const double att = 20.0 * std::log10(rms(y.samples, 512, 3584) / rms(x.samples, 512, 3584));
  CHECK(att <= -40.0);
}

TEST_CASE("property: low-pass filtering leaves pure-delay lags unchanged") {
  for (int d : {-20, -7, 0, 3, 15, 40}) {
    const auto a = gauss_pulse(512, 200.0, 2.5);
    const auto b = gauss_pulse(512, 200.0 + d, 2.5);
    const auto before = normalized_xcorr_peak(a, b, 1e-3);
    const auto after = normalized_xcorr_peak(lowpass_for_itd(a), lowpass_for_itd(b), 1e-3);
    CHECK(before.lag_samples == d);
    CHECK(after.lag_samples == d);
  }
}

TEST_CASE("upsample_4x interpolates exactly") {
  // 1 kHz over 480 samples is an integer number of periods (periodic, band-limited).
  const auto x = sine(480, 1000.0);
  const auto y = upsample_4x(x);
  REQUIRE(y.size() == 4 * x.size());
  CHECK(y.sample_rate == 4.0 * x.sample_rate);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(y[4 * i] - x[i]) < 1e-6);
  // Mid-points follow the continuous sine.
  for (std::size_t i = 0; i < 40; ++i) {
    const double t = (static_cast<double>(i) + 0.5) / 48000.0;
    CHECK(std::abs(y[4 * i + 2] - std::sin(2.0 * pi * 1000.0 * t)) < 1e-6);
  }

  const auto p0 = upsample_4x(gauss_pulse(256, 100.0, 3.0));
  const auto p1 = upsample_4x(gauss_pulse(256, 101.0, 3.0));
  CHECK(peak_index(p1) == peak_index(p0) + 4);
}

TEST_CASE("normalized cross-correlation peak") {
  const auto a = gauss_pulse(2048, 900.0, 4.0);
  CHECK(normalized_xcorr_peak(a, a, 1e-3).lag_samples == 0);
  CHECK(normalized_xcorr_peak(a, a, 1e-3).coefficient == doctest::Approx(1.0));

  auto a192 = a;
  a192.sample_rate = 192000.0;
  auto b192 = gauss_pulse(2048, 910.0, 4.0);
  b192.sample_rate = 192000.0;
  const auto pk = normalized_xcorr_peak(a192, b192, 1e-3);
  CHECK(pk.lag_samples == 10);
  CHECK(pk.lag_seconds == doctest::Approx(52.083333e-6).epsilon(1e-6));
}

TEST_CASE("property: xcorr lag equals an exhaustive scan and d/F_s for pure delays") {
  for (unsigned seed = 0; seed < 8; ++seed) {
    const auto a = random_ir(256, 300 + seed);
    const auto b = random_ir(256, 400 + seed);
    CHECK(normalized_xcorr_peak(a, b, 1e-3).lag_samples == brute_force_lag(a.samples, b.samples, 48));
  }
  for (int d = -48; d <= 48; d += 7) {
    const auto a = gauss_pulse(512, 250.0, 3.0);
    const auto b = gauss_pulse(512, 250.0 + d, 3.0);
    CHECK(normalized_xcorr_peak(a, b, 1e-3).lag_seconds == static_cast<double>(d) / 48000.0);
  }
}
