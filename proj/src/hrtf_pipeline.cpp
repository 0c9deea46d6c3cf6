#include "hrtfkit/hrtf_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hrtfkit/error.hpp"

namespace hrtfkit {
namespace {

struct OriginSpectra {
  std::map<int, Spectrum> by_elevation;
};

struct DirectionResult {
  BinauralPair pair;
  std::size_t flagged = 0;
  std::string error;
};

ImpulseResponse hrir_from(const ImpulseResponse& bir, const Spectrum& otf, std::size_t start,
                          const BuildConfig& cfg, std::size_t& flagged) {
  const ImpulseResponse windowed = apply_time_window(bir, start, cfg.min_gap);
  const DerivedHrtf h = derive_hrtf(forward_transform(windowed), otf);
  flagged += h.flagged_bins.size();
  ImpulseResponse hrir = inverse_transform(h.spectrum);
  hrir.t0_offset = 0;
  if (cfg.compensate) {
    hrir = compensate_noncausality(hrir, cfg.shift_m, cfg.head_radius, cfg.speed_of_sound);
  }
  return hrir;
}

DirectionResult process_direction(const RawMeasurementSet& set, const OriginSpectra& origin,
                                  const Direction& d, std::size_t start, const BuildConfig& cfg) {
  DirectionResult r;
  try {
    const BinauralPair& raw = set.bir.at(d);
    const Spectrum& otf = origin.by_elevation.at(d.elevation_deg);
    r.pair.left = hrir_from(raw.left, otf, start, cfg, r.flagged);
    r.pair.right = hrir_from(raw.right, otf, start, cfg, r.flagged);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

struct Prepared {
  WindowStart start;
  OriginSpectra origin;
};

Prepared prepare(const RawMeasurementSet& set, const BuildConfig& cfg, const MeasurementGrid& grid) {
  if (cfg.compensate) {
    validate_shift(cfg.shift_m, cfg.head_radius, cfg.speed_of_sound, set.sample_rate);
  }
  std::vector<std::string> missing;
  for (const auto& d : grid.directions()) {
    if (!set.bir.count(d)) missing.push_back("BIR " + to_string(d));
  }
  for (int el : grid.elevations()) {
    if (!set.oir.count(el)) missing.push_back("OIR at elevation " + std::to_string(el));
  }
  if (!missing.empty()) {
    std::string msg = "raw measurement set is incomplete: missing ";
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += (i ? ", " : "") + missing[i];
    if (missing.size() > 10) msg += " and " + std::to_string(missing.size() - 10) + " more";
    throw DataError(msg);
  }
  Prepared p;
  p.start = compute_window_start(set, cfg.pre_peak);
  for (int el : grid.elevations()) {
    try {
      p.origin.by_elevation.emplace(
          el, forward_transform(apply_time_window(set.oir.at(el), p.start.index, cfg.min_gap)));
    } catch (const Error& e) {
      throw DataError("OIR at elevation " + std::to_string(el) + ": " + e.what());
    }
  }
  return p;
}

HrirDatabase assemble(const std::vector<Direction>& dirs, std::vector<DirectionResult>& results,
                      const Prepared& p, const RawMeasurementSet& set, const BuildConfig& cfg) {
  std::string failures;
  std::size_t n_failed = 0;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    if (results[i].error.empty()) continue;
    if (n_failed < 10) failures += "\n  " + to_string(dirs[i]) + ": " + results[i].error;
    ++n_failed;
  }
  if (n_failed > 0) {
    throw DataError("database build failed for " + std::to_string(n_failed) + " direction(s):" +
                    failures);
  }
  HrirDatabase db;
  db.meta.sample_rate = set.sample_rate;
  db.meta.shift_m = cfg.compensate ? cfg.shift_m : 0;
  db.meta.window_start = p.start.index;
  db.meta.window_clamped = p.start.clamped;
  db.meta.head_radius = cfg.head_radius;
  db.meta.subject = cfg.subject;
  db.meta.compensated = cfg.compensate;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    db.meta.flagged_bins += results[i].flagged;
    db.hrir.emplace(dirs[i], std::move(results[i].pair));
  }
  return db;
}

}  // namespace

WindowStart compute_window_start(const RawMeasurementSet& set, std::size_t pre_peak) {
  const Direction left_ipsi{-90, 0};
  const Direction right_ipsi{90, 0};
  const auto l = set.bir.find(left_ipsi);
  const auto r = set.bir.find(right_ipsi);
  if (l == set.bir.end() || r == set.bir.end()) {
    throw DataError("window start needs the ipsilateral directions (-90, 0) and (90, 0)");
  }
  const std::size_t peak = std::min(peak_index(l->second.left), peak_index(r->second.right));
  WindowStart ws;
  if (peak < pre_peak) {
    ws.clamped = true;
    ws.index = 0;
  } else {
    ws.index = peak - pre_peak;
  }
  return ws;
}

WindowBounds window_bounds(const ImpulseResponse& ir, std::size_t start, std::size_t min_gap) {
  WindowBounds b;
  b.start = start;
  b.peak = peak_index(ir);
  if (b.peak < start) {
    throw DataError("peak at sample " + std::to_string(b.peak) + " precedes window start " +
                    std::to_string(start));
  }
  b.end = first_zero_crossing_after(ir, b.peak, min_gap);
  if (b.end - start > kHrirLength) {
    throw DataError("time window [" + std::to_string(start) + ", " + std::to_string(b.end) +
                    ") is longer than " + std::to_string(kHrirLength) + " samples");
  }
  return b;
}

ImpulseResponse apply_time_window(const ImpulseResponse& ir, std::size_t start, std::size_t min_gap) {
  const WindowBounds b = window_bounds(ir, start, min_gap);
  ImpulseResponse out;
  out.sample_rate = ir.sample_rate;
  out.t0_offset = static_cast<int>(start);
  out.samples.assign(kHrirLength, 0.0);
  std::copy(ir.samples.begin() + static_cast<long>(b.start), ir.samples.begin() + static_cast<long>(b.end),
            out.samples.begin());
  return out;
}

DerivedHrtf derive_hrtf(const Spectrum& btf, const Spectrum& otf, double floor) {
  if (btf.size() != otf.size() || btf.bin_spacing != otf.bin_spacing) {
    throw PreconditionError("derive_hrtf: BTF and OTF are on different frequency grids");
  }
  double peak = 0.0;
  for (const auto& g : otf.bins) peak = std::max(peak, std::abs(g));
  DerivedHrtf out;
  out.spectrum.bin_spacing = btf.bin_spacing;
  out.spectrum.bins.resize(btf.size());
  const double limit = floor * peak;
  for (std::size_t k = 0; k < btf.size(); ++k) {
    if (std::abs(otf.bins[k]) < limit || peak == 0.0) {
      out.spectrum.bins[k] = 0.0;
      out.flagged_bins.push_back(k);
    } else {
      out.spectrum.bins[k] = btf.bins[k] / otf.bins[k];
    }
  }
  return out;
}

double max_noncausal_delay(double head_radius, double speed_of_sound) {
  if (head_radius < 0.0) throw PreconditionError("head radius must be >= 0");
  if (!(speed_of_sound > 0.0)) throw PreconditionError("speed of sound must be positive");
  return head_radius / speed_of_sound;
}

void validate_shift(int m, double head_radius, double speed_of_sound, double sample_rate,
                    std::size_t length) {
  const double bound = max_noncausal_delay(head_radius, speed_of_sound) * sample_rate;
  if (!(static_cast<double>(m) > bound)) {
    throw PreconditionError("shift m = " + std::to_string(m) +
                            " samples does not exceed tau_max * F_s = " + std::to_string(bound) +
                            " samples (tau_max = l / c with l = " + std::to_string(head_radius) +
                            " m)");
  }
  if (static_cast<std::size_t>(m) >= length / 2) {
    throw PreconditionError("shift m = " + std::to_string(m) + " must stay below " +
                            std::to_string(length / 2) + " so the peak lands in the first half");
  }
}

ImpulseResponse compensate_noncausality(const ImpulseResponse& hrir, int m, double head_radius,
                                        double speed_of_sound) {
  validate_shift(m, head_radius, speed_of_sound, hrir.sample_rate, hrir.size());
  return circular_shift(hrir, m);
}

const BinauralPair& HrirDatabase::at(const Direction& d) const {
  const auto it = hrir.find(d);
  if (it == hrir.end()) throw DataError("database has no HRIR for direction " + to_string(d));
  return it->second;
}

HrirDatabase build_database(const RawMeasurementSet& set, const BuildConfig& cfg,
                            const MeasurementGrid& grid) {
  const Prepared p = prepare(set, cfg, grid);
  const auto& dirs = grid.directions();
  std::vector<DirectionResult> results(dirs.size());
  const long n = static_cast<long>(dirs.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < n; ++i) {
    results[static_cast<std::size_t>(i)] =
        process_direction(set, p.origin, dirs[static_cast<std::size_t>(i)], p.start.index, cfg);
  }
  return assemble(dirs, results, p, set, cfg);
}

HrirDatabase build_database_serial(const RawMeasurementSet& set, const BuildConfig& cfg,
                                   const MeasurementGrid& grid) {
  const Prepared p = prepare(set, cfg, grid);
  const auto& dirs = grid.directions();
  std::vector<DirectionResult> results;
  results.reserve(dirs.size());
  for (const auto& d : dirs) results.push_back(process_direction(set, p.origin, d, p.start.index, cfg));
  return assemble(dirs, results, p, set, cfg);
}

}  // namespace hrtfkit
