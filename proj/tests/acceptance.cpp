// Acceptance runner: one PASS/FAIL line per criterion, with runtime.
// Exit status is non-zero when any criterion fails.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>

#include "hrtfkit/electroacoustics.hpp"
#include "hrtfkit/hrtf_pipeline.hpp"
#include "hrtfkit/localization_cues.hpp"
#include "hrtfkit/synth_oracle.hpp"

using namespace hrtfkit;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Shared synthetic data, built on first use.
const synth::SynthOptions& options() {
  static const synth::SynthOptions o;
  return o;
}
const RawMeasurementSet& coloured_set() {
  static const auto s = synth::synth_set(options(), synth::SpeakerColoration::sealed_module());
  return s;
}
const HrirDatabase& compensated() {
  static const auto db = build_database(coloured_set());
  return db;
}
const cues::ItdMap& compensated_itd() {
  static const auto m = cues::itd_map(compensated());
  return m;
}

double interp_abs(const std::vector<double>& f, const std::vector<std::complex<double>>& v, double at) {
  std::size_t k = 1;
  while (f[k] < at) ++k;
  const double t = (at - f[k - 1]) / (f[k] - f[k - 1]);
  return (1.0 - t) * std::abs(v[k - 1]) + t * std::abs(v[k]);
}

double max_adjacent_jump(const cues::ItdMap& itd, Direction* where) {
  double worst = 0.0;
  for (const auto& [d, v] : itd.values) {
    const auto next = Direction::make(d.azimuth_deg + 5, d.elevation_deg);
    const double j = std::abs(itd.values.at(next) - v);
    if (j > worst) {
      worst = j;
      if (where) *where = d;
    }
  }
  return worst;
}

Outcome criterion1() {
  const auto r = electro::simulate_sealed_module(electro::reference_driver(), {}, electro::log_frequency_grid());
  const auto s = electro::summarize(r);
  const double u162 = interp_abs(r.frequencies, r.volume_velocity, 162.0);
  const bool a = std::abs(s.rolloff_hz - 116.0) <= 3.0;
  const bool b = std::abs(s.peak_excursion_hz - 127.0) <= 4.0 && s.peak_excursion_m < 1e-3;
  const bool c = u162 > 0.002;
  return {a && b && c, fmt("roll-off %.2f Hz; excursion peak %.4f mm at %.1f Hz; |U_a|(162 Hz) %.5f m^3/s",
                           s.rolloff_hz, s.peak_excursion_m * 1e3, s.peak_excursion_hz, u162)};
}

Outcome criterion2() {
  const auto r = electro::check_consistency(electro::reference_driver());
  return {r.q_ts_rel_error < 0.005 && r.f0_rel_error < 0.005 && r.v_as_rel_error < 0.015,
          fmt("Q_ts %.3f%%, F_0 %.3f%%, V_as %.3f%%", 100 * r.q_ts_rel_error, 100 * r.f0_rel_error,
              100 * r.v_as_rel_error)};
}

Outcome criterion3() {
  const auto t = electro::reference_driver();
  const auto f = electro::log_frequency_grid();
  const auto fit = electro::fit_tsp_delta_mass(electro::make_impedance_curve(t, f),
                                               electro::make_impedance_curve(t, f, 1e-3), 1e-3, t.s_d);
  const auto& p = fit.params;
  const double errs[] = {p.f0 / t.f0, p.m_ms / t.m_ms, p.c_ms / t.c_ms, p.q_ms / t.q_ms,
                         p.q_es / t.q_es, p.q_ts / t.q_ts, p.bl / t.bl};
  double worst = 0.0;
  for (double e : errs) worst = std::max(worst, std::abs(e - 1.0));
  return {worst <= 0.01, fmt("worst relative error %.3f%% (F_0 %.3f, BL %.4f, Q_ts %.4f)", 100 * worst, p.f0,
                             p.bl, p.q_ts)};
}

Outcome criterion4() {
  const auto& itd = compensated_itd();
  const auto& m = options().model;
  double ww = 0.0, median = 0.0, anti = 0.0;
  for (const auto& [d, v] : itd.values) {
    if (d.elevation_deg == 0 && std::abs(d.azimuth_deg) <= 90) {
      const double th = d.azimuth_deg * pi / 180.0;
      ww = std::max(ww, std::abs(v - m.head_radius / m.speed_of_sound * (std::sin(th) + th)));
    }
    if (d.azimuth_deg == 0) median = std::max(median, std::abs(v));
    anti = std::max(anti, std::abs(v + itd.values.at(d.mirrored())));
  }
  const bool ok = ww <= 26e-6 && median <= 5.21e-6 && anti <= itd.resolution + 1e-12;
  return {ok, fmt("Woodworth error %.2f us; |ITD(0, phi)| %.2f us; antisymmetry %.2f us", ww * 1e6,
                  median * 1e6, anti * 1e6)};
}

Outcome criterion5() {
  BuildConfig raw;
  raw.compensate = false;
  const auto unc = build_database(coloured_set(), raw);
  Direction at{};
  const double jump_unc = max_adjacent_jump(cues::itd_map(unc), &at);
  const double jump_cmp = max_adjacent_jump(compensated_itd(), nullptr);
  const bool lateral = std::abs(std::abs(at.azimuth_deg) - 90) <= 30 || std::abs(std::abs(at.azimuth_deg + 5) - 90) <= 30;
  double mag = 0.0;
  for (const auto& [d, p] : compensated().hrir) {
    for (Ear e : {Ear::Left, Ear::Right}) {
      const auto x = forward_transform(p.ear(e));
      const auto y = forward_transform(unc.at(d).ear(e));
      for (std::size_t k = 0; k < x.size(); ++k) mag = std::max(mag, std::abs(std::abs(x.bins[k]) - std::abs(y.bins[k])));
    }
  }
  return {jump_unc > 300e-6 && lateral && jump_cmp < 80e-6 && mag < 1e-9,
          fmt("uncompensated jump %.1f us after %s; compensated %.1f us; |H| difference %.1e", jump_unc * 1e6,
              to_string(at).c_str(), jump_cmp * 1e6, mag)};
}

Outcome criterion6() {
  const auto flat = build_database(synth::synth_set(options(), synth::SpeakerColoration::flat()));
  double worst = 0.0, peak = 0.0;
  for (const auto& [d, p] : flat.hrir) {
    const auto& q = compensated().at(d);
    for (std::size_t i = 0; i < kHrirLength; ++i) {
      worst = std::max({worst, std::abs(p.left[i] - q.left[i]), std::abs(p.right[i] - q.right[i])});
      peak = std::max({peak, std::abs(p.left[i]), std::abs(p.right[i])});
    }
  }
  return {worst / peak <= 1e-6, fmt("max relative difference flat vs coloured %.2e", worst / peak)};
}

Outcome criterion7() {
  const auto& p = compensated().at(Direction::make(0, 0));
  const double df = forward_transform(p.left).bin_spacing;
  const double ild_df = cues::ild_narrowband(p.left, p.right).bin_spacing;
  const double itd = cues::itd_resolution();
  return {df == 93.75 && ild_df == 10.0 && itd == 1.0 / 192000.0,
          fmt("bin %.6g Hz, ILD grid %.6g Hz, ITD step %.6f us", df, ild_df, itd * 1e6)};
}

Outcome criterion8() {
  synth::SynthOptions opt = options();
  opt.reflection = synth::ReflectionSpec{300, 0.3};
  const auto set = synth::synth_set(opt, synth::SpeakerColoration::sealed_module());
  const auto start = compute_window_start(set).index;
  std::size_t checked = 0, failures = 0;
  std::size_t min_gap = 1u << 30;
  for (const auto& [d, pair] : set.bir) {
    for (const auto* ir : {&pair.left, &pair.right}) {
      const auto b = window_bounds(*ir, start);
      const auto w = apply_time_window(*ir, start);
      double tail = 0.0;
      for (std::size_t i = b.end - start; i < w.size(); ++i) tail += w[i] * w[i];
      const bool excluded = b.end <= b.peak + 300;
      failures += (tail == 0.0 && excluded && b.end >= b.peak + 120) ? 0 : 1;
      min_gap = std::min(min_gap, b.end - b.peak);
      ++checked;
    }
  }
  // The reflected pulses must not leak into the database either.
  const auto db = build_database(set);
  const auto clean_ok = [&] {
    double worst = 0.0, peak = 0.0;
    for (const auto& [d, p] : db.hrir) {
      const auto& q = compensated().at(d);
      for (std::size_t i = 0; i < kHrirLength; ++i) {
        worst = std::max(worst, std::abs(p.right[i] - q.right[i]));
        peak = std::max(peak, std::abs(q.right[i]));
      }
    }
    return worst / peak < 1e-9;
  }();
  return {failures == 0 && clean_ok,
          fmt("%zu windows, %zu failures, smallest end-peak gap %zu samples, database unaffected: %s", checked,
              failures, min_gap, clean_ok ? "yes" : "no")};
}

Outcome criterion9() {
  synth::SynthOptions opt = options();
  opt.notch = synth::NotchSpec{9000.0, 15.0};
  const auto db = build_database(synth::synth_set(opt, synth::SpeakerColoration::sealed_module()));
  const auto entries = cues::median_plane_features(db);
  std::size_t hits = 0;
  for (const auto& e : entries) {
    for (const auto& n : e.features.notches) {
      if (std::abs(n.frequency_hz - 9000.0) <= 500.0) {
        ++hits;
        break;
      }
    }
  }
  // Two-path comb, t0 = 0.25 ms: the null at 1/(2 t0) = 2 kHz.
  ImpulseResponse h;
  h.samples.assign(kHrirLength, 0.0);
  h.samples[200] = 1.0;
  h.samples[212] = 0.5;
  const auto prtf = cues::extract_prtf(h);
  std::size_t best = 50;
  for (std::size_t k = 50; k <= 400; ++k) {
    if (std::abs(prtf.bins[k]) < std::abs(prtf.bins[best])) best = k;
  }
  const double two_path = prtf.frequency(best);
  const auto features = cues::find_spectral_features(prtf);
  bool in_band = false;
  for (const auto& n : features.notches) in_band = in_band || std::abs(n.frequency_hz - 6000.0) <= prtf.bin_spacing;
  return {hits == entries.size() && !entries.empty() && std::abs(two_path - 2000.0) <= prtf.bin_spacing && in_band,
          fmt("9 kHz notch on %zu/%zu median-plane entries; two-path null at %.0f Hz", hits, entries.size(),
              two_path)};
}

Outcome criterion10() {
  const auto base = fs::temp_directory_path() / "hrtfkit_acceptance";
  fs::remove_all(base);
  const auto a = (base / "parallel").string();
  const auto b = (base / "serial").string();
  omp_set_num_threads(3);
  write_database(a, build_database(coloured_set()));
  omp_set_num_threads(1);
  write_database(b, build_database_serial(coloured_set()));
  std::size_t files = 0, bad_shape = 0, differ = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const auto name = e.path().filename().string();
    if (name.rfind("hrir_", 0) != 0) continue;
    ++files;
    const auto text = slurp(e.path());
    if (text != slurp(fs::path(b) / name)) ++differ;
    std::istringstream in(text);
    std::string line;
    std::size_t rows = 0;
    bool cols_ok = true;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      double x, y, z;
      cols_ok = cols_ok && static_cast<bool>(ls >> x >> y) && !(ls >> z);
      ++rows;
    }
    if (rows != 512 || !cols_ok) ++bad_shape;
  }
  const auto back = read_database(a);
  double worst = 0.0;
  for (const auto& [d, p] : compensated().hrir) {
    const auto& q = back.at(d);
    for (std::size_t i = 0; i < kHrirLength; ++i) {
      worst = std::max({worst, std::abs(p.left[i] - q.left[i]), std::abs(p.right[i] - q.right[i])});
    }
  }
  fs::remove_all(base);
  return {files == 1944 && bad_shape == 0 && differ == 0 && worst <= 1e-8,
          fmt("%zu files, %zu malformed, %zu differ across schedules, read-back error %.1e", files, bad_shape,
              differ, worst)};
}

Outcome criterion11() {
  const auto l = cues::hpd(compensated(), Ear::Left);
  const auto r = cues::hpd(compensated(), Ear::Right);
  bool zero = true;
  double mirror = 0.0;
  for (std::size_t f = 0; f < l.frequencies.size(); ++f) {
    for (std::size_t i = 0; i < l.azimuths.size(); ++i) {
      if (l.azimuths[i] == 0) zero = zero && l.db[f][i] == 0.0 && r.db[f][i] == 0.0;
      const int mirrored = Direction::make(-l.azimuths[i], 0).azimuth_deg;
      for (std::size_t j = 0; j < r.azimuths.size(); ++j) {
        if (r.azimuths[j] == mirrored) mirror = std::max(mirror, std::abs(l.db[f][i] - r.db[f][j]));
      }
    }
  }
  return {zero && mirror <= 0.2, fmt("front exactly 0 dB: %s; mirror error %.4f dB", zero ? "yes" : "no", mirror)};
}

}  // namespace

int main() {
  struct Item {
    int id;
    const char* title;
    std::function<Outcome()> run;
    double limit_s;  // 0 = no runtime bound
  };
  const Item items[] = {
      {1, "speaker simulation", criterion1, 1.0},
      {2, "driver table self-consistency", criterion2, 0.0},
      {3, "TSP round trip", criterion3, 5.0},
      {4, "end-to-end ITD fidelity", criterion4, 60.0},
      {5, "non-causality compensation", criterion5, 0.0},
      {6, "system cancellation", criterion6, 0.0},
      {7, "resolution constants", criterion7, 0.0},
      {8, "windowing", criterion8, 0.0},
      {9, "spectral-cue oracle", criterion9, 0.0},
      {10, "format fidelity", criterion10, 0.0},
      {11, "horizontal-plane directivity", criterion11, 0.0},
  };
  int failed = 0;
  for (const auto& item : items) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = item.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (item.limit_s > 0.0 && secs >= item.limit_s) {
      o.pass = false;
      o.detail += fmt(" (runtime limit %.0f s exceeded)", item.limit_s);
    }
    std::printf("%s criterion %2d %-30s %7.2f s  %s\n", o.pass ? "PASS" : "FAIL", item.id, item.title, secs,
                o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/11 criteria passed\n", 11 - failed);
  return failed == 0 ? 0 : 1;
}
