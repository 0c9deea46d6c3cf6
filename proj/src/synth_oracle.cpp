#include "hrtfkit/synth_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "hrtfkit/error.hpp"

namespace hrtfkit::synth {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kPulseHalfWidth = 16;
constexpr int kShadowHalfWidth = 24;
constexpr int kNotchHalfWidth = 32;
constexpr double kNotchSigma = 9.5;  // samples, Gaussian envelope of the band-pass

// A short signal placed at an absolute sample index.
struct Compact {
  long first = 0;
  std::vector<double> v;
};

Compact convolve(const Compact& x, const std::vector<double>& h, long h_origin) {
  Compact y;
  y.first = x.first - h_origin;
  y.v.assign(x.v.size() + h.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.v.size(); ++i) {
    for (std::size_t k = 0; k < h.size(); ++k) y.v[i + k] += x.v[i] * h[k];
  }
  return y;
}

// Hann-tapered sinc centred at a fractional sample position. An integer
// position gives an exact unit impulse.
Compact pulse_at(double position) {
  Compact p;
  p.first = static_cast<long>(std::floor(position)) - kPulseHalfWidth;
  p.v.assign(2 * kPulseHalfWidth + 2, 0.0);
  for (std::size_t i = 0; i < p.v.size(); ++i) {
    const double t = static_cast<double>(p.first + static_cast<long>(i)) - position;
    if (std::abs(t) >= kPulseHalfWidth) continue;
    const double sinc = t == 0.0 ? 1.0 : std::sin(kPi * t) / (kPi * t);
    p.v[i] = sinc * 0.5 * (1.0 + std::cos(kPi * t / kPulseHalfWidth));
  }
  return p;
}

// (1 - alpha) delta + alpha * Gaussian low-pass. Zero phase, so the shadow
// changes the spectrum without moving the arrival time.
std::vector<double> shadow_kernel(double alpha, const SphericalHeadModel& m) {
  const double fc = 3.0 * m.speed_of_sound / (2.0 * kPi * m.head_radius);
  const double sigma = m.sample_rate / (2.0 * kPi * fc);
  std::vector<double> g(2 * kShadowHalfWidth + 1);
  double sum = 0.0;
  for (int k = -kShadowHalfWidth; k <= kShadowHalfWidth; ++k) {
    g[static_cast<std::size_t>(k + kShadowHalfWidth)] = std::exp(-0.5 * k * k / (sigma * sigma));
    sum += g[static_cast<std::size_t>(k + kShadowHalfWidth)];
  }
  for (auto& v : g) v *= alpha / sum;
  g[kShadowHalfWidth] += 1.0 - alpha;
  return g;
}

// delta - beta * band-pass(f_n), with the band-pass normalised to unit gain
// at f_n, so the response at f_n is exactly 1 - beta.
std::vector<double> notch_kernel(const NotchSpec& n, double sample_rate) {
  const double w = 2.0 * kPi * n.center_hz / sample_rate;
  std::vector<double> bp(2 * kNotchHalfWidth + 1);
  double gain = 0.0;
  for (int k = -kNotchHalfWidth; k <= kNotchHalfWidth; ++k) {
    const double v = std::exp(-0.5 * k * k / (kNotchSigma * kNotchSigma)) * std::cos(w * k);
    bp[static_cast<std::size_t>(k + kNotchHalfWidth)] = v;
    gain += v * std::cos(w * k);
  }
  const double beta = 1.0 - std::pow(10.0, -n.depth_db / 20.0);
  for (auto& v : bp) v *= -beta / gain;
  bp[kNotchHalfWidth] += 1.0;
  return bp;
}

std::uint64_t direction_seed(std::uint64_t seed, int az, int el, int channel) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(az + 1000), static_cast<std::uint32_t>(el + 1000),
                    static_cast<std::uint32_t>(channel)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

ImpulseResponse render(const Compact& direct, const SynthOptions& opt, std::uint64_t noise_seed) {
  ImpulseResponse ir;
  ir.sample_rate = opt.model.sample_rate;
  ir.samples.assign(opt.length, 0.0);
  auto place = [&](const Compact& c, long offset, double gain) {
    const long first = c.first + offset;
    const long last = first + static_cast<long>(c.v.size());
    if (first < 0 || last > static_cast<long>(opt.length)) {
      throw PreconditionError("synthetic pulse (plus reflection offset) does not fit in a " +
                              std::to_string(opt.length) + "-sample buffer");
    }
    for (std::size_t i = 0; i < c.v.size(); ++i) ir.samples[static_cast<std::size_t>(first) + i] += gain * c.v[i];
  };
  place(direct, 0, 1.0);
  if (opt.reflection) place(direct, opt.reflection->offset_samples, opt.reflection->gain);
  if (opt.noise_rms > 0.0) {
    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> noise(0.0, opt.noise_rms);
    for (auto& v : ir.samples) v += noise(rng);
  }
  return ir;
}

void check_options(const SynthOptions& opt) {
  const auto& m = opt.model;
  if (!(m.head_radius > 0.0) || !(m.head_radius < m.source_distance)) {
    throw PreconditionError("head radius must satisfy 0 < a_h < source distance");
  }
  if (!(m.speed_of_sound > 0.0) || !(m.sample_rate > 0.0)) {
    throw PreconditionError("speed of sound and sample rate must be positive");
  }
  if (m.shadow_strength < 0.0 || m.shadow_strength > 1.0) {
    throw PreconditionError("shadow strength must lie in [0, 1]");
  }
  if (opt.reflection && opt.reflection->offset_samples < static_cast<int>(0.005 * m.sample_rate)) {
    throw PreconditionError("reflection offset must be at least 5 ms");
  }
  if (opt.notch && !(opt.notch->center_hz > 0.0 && opt.notch->center_hz < m.sample_rate / 2.0)) {
    throw PreconditionError("notch frequency must lie between 0 and Nyquist");
  }
  if (opt.notch && !(opt.notch->depth_db > 0.0)) throw PreconditionError("notch depth must be positive");
}

}  // namespace

SpeakerColoration SpeakerColoration::flat() { return SpeakerColoration({1.0}); }

SpeakerColoration SpeakerColoration::minimum_phase(const std::vector<double>& frequencies,
                                                   const std::vector<double>& magnitude_db,
                                                   double sample_rate, int taps,
                                                   double dynamic_range_db) {
  if (frequencies.size() != magnitude_db.size() || frequencies.size() < 2) {
    throw PreconditionError("coloration: need matching frequency and magnitude arrays");
  }
  if (taps < 1) throw PreconditionError("coloration: taps must be positive");
  constexpr std::size_t kN = 4096;
  const double top = *std::max_element(magnitude_db.begin(), magnitude_db.end());
  const double bottom = top - dynamic_range_db;

  auto level_at = [&](double f) {
    if (f <= frequencies.front()) return magnitude_db.front();
    if (f >= frequencies.back()) return magnitude_db.back();
    const auto it = std::upper_bound(frequencies.begin(), frequencies.end(), f);
    const std::size_t i = static_cast<std::size_t>(it - frequencies.begin());
    const double t = std::log(f / frequencies[i - 1]) / std::log(frequencies[i] / frequencies[i - 1]);
    return magnitude_db[i - 1] + t * (magnitude_db[i] - magnitude_db[i - 1]);
  };

  // Real cepstrum of the log magnitude, folded onto positive quefrencies.
  Spectrum log_mag;
  log_mag.bin_spacing = sample_rate / kN;
  log_mag.bins.resize(kN);
  for (std::size_t k = 0; k <= kN / 2; ++k) {
    const double db = std::max(level_at(log_mag.frequency(k)), bottom) - top;
    const double v = db * std::log(10.0) / 20.0;
    log_mag.bins[k] = v;
    if (k > 0 && k < kN / 2) log_mag.bins[kN - k] = v;
  }
  ImpulseResponse cep = inverse_transform(log_mag);
  for (std::size_t n = 1; n < kN / 2; ++n) {
    cep.samples[n] *= 2.0;
    cep.samples[kN - n] = 0.0;
  }
  Spectrum h = forward_transform(cep);
  for (auto& b : h.bins) b = std::exp(b);
  // exp() of a conjugate-symmetric spectrum stays conjugate-symmetric only
  // to rounding; enforce it before the inverse transform.
  for (std::size_t k = 1; k < kN / 2; ++k) h.bins[kN - k] = std::conj(h.bins[k]);
  h.bins[0] = h.bins[0].real();
  h.bins[kN / 2] = h.bins[kN / 2].real();
  const ImpulseResponse hmin = inverse_transform(h);

  std::vector<double> out(hmin.samples.begin(), hmin.samples.begin() + taps);
  const int fade = std::max(1, taps / 4);
  for (int i = 0; i < fade; ++i) {
    const double w = 0.5 * (1.0 + std::cos(kPi * (i + 1) / (fade + 1)));
    out[static_cast<std::size_t>(taps - fade + i)] *= w;
  }
  return SpeakerColoration(std::move(out));
}

SpeakerColoration SpeakerColoration::sealed_module(double sample_rate) {
  const auto freqs = electro::log_frequency_grid();
  const auto resp = electro::simulate_sealed_module(electro::reference_driver(), {}, freqs);
  return minimum_phase(freqs, resp.spl, sample_rate);
}

namespace {

// sin of an integer angle in degrees, exact at multiples of 90 so that
// median-plane and polar directions are exactly left/right symmetric.
double sin_deg(int deg) {
  // Reduce to the first quadrant so sin(-x) == -sin(x) and
  // sin(180 - x) == sin(x) hold bit for bit.
  int r = ((deg % 360) + 360) % 360;
  double sign = 1.0;
  if (r > 180) {
    r = 360 - r;
    sign = -1.0;
  }
  if (r > 90) r = 180 - r;
  if (r == 0) return 0.0;
  if (r == 90) return sign;
  return sign * std::sin(r * kPi / 180.0);
}

double cos_deg(int deg) { return sin_deg(deg + 90); }

}  // namespace

double ear_angle(const Direction& d, Ear ear) {
  // Interaural axis is y; the right ear sits at +y.
  const double lateral = cos_deg(d.elevation_deg) * sin_deg(d.azimuth_deg);
  const double cos_gamma = std::clamp(ear == Ear::Right ? lateral : -lateral, -1.0, 1.0);
  return std::acos(cos_gamma);
}

double ear_delay(const Direction& d, Ear ear, const SphericalHeadModel& model) {
  const double gamma = ear_angle(d, ear);
  const double t = model.head_radius / model.speed_of_sound;
  if (gamma < kPi / 2.0) return -t * std::cos(gamma);
  return t * (gamma - kPi / 2.0);
}

double itd_true(const Direction& d, const SphericalHeadModel& model) {
  return ear_delay(d, Ear::Left, model) - ear_delay(d, Ear::Right, model);
}

double woodworth_itd(double azimuth_deg, const SphericalHeadModel& model) {
  if (std::abs(azimuth_deg) > 90.0) throw PreconditionError("Woodworth formula is used for |theta| <= 90");
  const double th = azimuth_deg * kPi / 180.0;
  return model.head_radius / model.speed_of_sound * (std::sin(th) + th);
}

int bulk_delay_samples(const SphericalHeadModel& model) {
  return static_cast<int>(std::lround(model.source_distance / model.speed_of_sound * model.sample_rate));
}

BinauralPair synth_bir(const Direction& d, const SynthOptions& opt, const SpeakerColoration& col) {
  check_options(opt);
  const auto& m = opt.model;
  const double bulk = bulk_delay_samples(m);
  auto ear_signal = [&](Ear ear, int channel) {
    Compact x = pulse_at(bulk + ear_delay(d, ear, m) * m.sample_rate);
    const double gamma = ear_angle(d, ear);
    const double alpha = m.shadow_strength * std::clamp((gamma - kPi / 2.0) / (kPi / 2.0), 0.0, 1.0);
    if (alpha > 0.0) x = convolve(x, shadow_kernel(alpha, m), kShadowHalfWidth);
    if (opt.notch) x = convolve(x, notch_kernel(*opt.notch, m.sample_rate), kNotchHalfWidth);
    x = convolve(x, col.taps(), 0);
    return render(x, opt, direction_seed(opt.seed, d.azimuth_deg, d.elevation_deg, channel));
  };
  return {ear_signal(Ear::Left, 0), ear_signal(Ear::Right, 1)};
}

ImpulseResponse synth_oir(int elevation_deg, const SynthOptions& opt, const SpeakerColoration& col) {
  check_options(opt);
  Compact x{bulk_delay_samples(opt.model), {1.0}};
  x = convolve(x, col.taps(), 0);
  SynthOptions no_reflection = opt;
  no_reflection.reflection.reset();
  return render(x, no_reflection, direction_seed(opt.seed, 999, elevation_deg, 2));
}

RawMeasurementSet synth_set(const SynthOptions& opt, const SpeakerColoration& col,
                            const MeasurementGrid& grid) {
  check_options(opt);
  const auto& dirs = grid.directions();
  std::vector<BinauralPair> birs(dirs.size());
  std::vector<std::string> errors(dirs.size());
  const long n = static_cast<long>(dirs.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      birs[k] = synth_bir(dirs[k], opt, col);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    if (!errors[k].empty()) throw PreconditionError(to_string(dirs[k]) + ": " + errors[k]);
  }
  RawMeasurementSet set;
  set.sample_rate = opt.model.sample_rate;
  for (std::size_t k = 0; k < dirs.size(); ++k) set.bir.emplace(dirs[k], std::move(birs[k]));
  for (int el : grid.elevations()) set.oir.emplace(el, synth_oir(el, opt, col));
  return set;
}

std::vector<TruthRow> truth_table(const SynthOptions& opt, const MeasurementGrid& grid) {
  check_options(opt);
  std::vector<TruthRow> rows;
  rows.reserve(grid.size());
  const double bulk = bulk_delay_samples(opt.model);
  for (const auto& d : grid.directions()) {
    TruthRow r;
    r.direction = d;
    r.itd_true_s = itd_true(d, opt.model);
    r.notch_hz = opt.notch ? opt.notch->center_hz : 0.0;
    if (opt.reflection) {
      const double first = std::min(ear_delay(d, Ear::Left, opt.model), ear_delay(d, Ear::Right, opt.model));
      r.reflection_sample = std::lround(bulk + first * opt.model.sample_rate) + opt.reflection->offset_samples;
    }
    rows.push_back(r);
  }
  return rows;
}

void write_truth_csv(const std::string& path, const std::vector<TruthRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "azimuth_deg,elevation_deg,itd_true_s,notch_hz,reflection_sample\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.12e,%.6f,%ld\n", r.direction.azimuth_deg,
                  r.direction.elevation_deg, r.itd_true_s, r.notch_hz, r.reflection_sample);
    out << buf;
  }
}

std::vector<TruthRow> read_truth_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open truth file " + path);
  std::vector<TruthRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    int az = 0;
    int el = 0;
    TruthRow r;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%ld", &az, &el, &r.itd_true_s, &r.notch_hz,
                    &r.reflection_sample) != 5) {
      throw DataError(path + ":" + std::to_string(line_no) + ": malformed truth row");
    }
    r.direction = Direction::make(az, el);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace hrtfkit::synth
