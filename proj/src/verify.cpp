#include "hrtfkit/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

namespace hrtfkit {
namespace {

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

VerifyCheck check(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok, false, std::move(detail)};
}

VerifyCheck skipped(std::string name, std::string why) {
  return {std::move(name), true, true, std::move(why)};
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

VerifyReport verify_database(const HrirDatabase& db,
                             const std::optional<std::vector<synth::TruthRow>>& truth,
                             const VerifyLimits& limits) {
  VerifyReport report;
  const std::size_t half = kHrirLength / 2;

  std::size_t late = 0;
  Direction worst{};
  std::size_t worst_peak = 0;
  for (const auto& [d, pair] : db.hrir) {
    for (const auto* ir : {&pair.left, &pair.right}) {
      const std::size_t p = peak_index(*ir);
      if (p >= half) {
        ++late;
        if (p > worst_peak) {
          worst_peak = p;
          worst = d;
        }
      }
    }
  }
  report.checks.push_back(check("causality", late == 0,
                                late == 0 ? "all peaks in the first half"
                                          : std::to_string(late) + " channel(s) peak at or after sample " +
                                                std::to_string(half) + ", latest " +
                                                std::to_string(worst_peak) + " at " + to_string(worst)));

  const cues::ItdMap itd = cues::itd_map(db);
  const double step = itd.resolution;
  double max_abs = 0.0;
  for (const auto& kv : itd.values) max_abs = std::max(max_abs, std::abs(kv.second));
  report.checks.push_back(check("itd_bound", max_abs <= cues::kItdMaxLag + 1e-12,
                                "max |ITD| = " + fmt("%.2f us", max_abs * 1e6)));

  std::map<int, std::vector<std::pair<int, double>>> rows;
  for (const auto& [d, v] : itd.values) rows[d.elevation_deg].emplace_back(d.azimuth_deg, v);
  double max_jump = 0.0;
  Direction jump_at{};
  for (auto& [el, row] : rows) {
    std::sort(row.begin(), row.end());
    for (std::size_t i = 0; i < row.size(); ++i) {
      const auto& a = row[i];
      const auto& b = row[(i + 1) % row.size()];
      const int gap = ((b.first - a.first) % 360 + 360) % 360;
      if (gap != 5) continue;
      const double jump = std::abs(b.second - a.second);
      if (jump > max_jump) {
        max_jump = jump;
        jump_at = Direction{a.first, el};
      }
    }
  }
  report.checks.push_back(check("itd_continuity", max_jump * 1e6 < limits.continuity_us,
                                "max adjacent jump " + fmt("%.2f us", max_jump * 1e6) + " after " +
                                    to_string(jump_at)));

  double median_worst = 0.0;
  double anti_worst = 0.0;
  for (const auto& [d, v] : itd.values) {
    if (d.azimuth_deg == 0 || d.azimuth_deg == 180) median_worst = std::max(median_worst, std::abs(v));
    const auto m = itd.values.find(d.mirrored());
    if (m != itd.values.end()) anti_worst = std::max(anti_worst, std::abs(v + m->second));
  }
  report.checks.push_back(check("median_plane_itd", median_worst <= step + 1e-12,
                                "max |ITD| on median plane " + fmt("%.2f us", median_worst * 1e6)));
  report.checks.push_back(check("itd_antisymmetry", anti_worst <= step + 1e-12,
                                "max |ITD(th) + ITD(-th)| " + fmt("%.2f us", anti_worst * 1e6)));

  const cues::HpdPattern left = cues::hpd(db, Ear::Left);
  const cues::HpdPattern right = cues::hpd(db, Ear::Right);
  bool front_zero = true;
  for (const auto* p : {&left, &right}) {
    const auto it = std::find(p->azimuths.begin(), p->azimuths.end(), 0);
    const auto j = static_cast<std::size_t>(it - p->azimuths.begin());
    for (const auto& row : p->db) front_zero = front_zero && row[j] == 0.0;
  }
  report.checks.push_back(check("hpd_front_zero", front_zero, "HPD at azimuth 0 is exactly 0 dB"));

  if (!truth) {
    for (const char* name : {"hpd_mirror", "itd_woodworth", "notch_recovery"}) {
      report.checks.push_back(skipped(name, "no truth file"));
    }
    return report;
  }

  double mirror_worst = 0.0;
  for (std::size_t f = 0; f < left.frequencies.size(); ++f) {
    for (std::size_t i = 0; i < left.azimuths.size(); ++i) {
      const int mirror_az = Direction::make(-left.azimuths[i], 0).azimuth_deg;
      const auto it = std::find(right.azimuths.begin(), right.azimuths.end(), mirror_az);
      if (it == right.azimuths.end()) continue;
      const auto j = static_cast<std::size_t>(it - right.azimuths.begin());
      mirror_worst = std::max(mirror_worst, std::abs(left.db[f][i] - right.db[f][j]));
    }
  }
  report.checks.push_back(check("hpd_mirror", mirror_worst <= limits.mirror_db,
                                "max |HPD_L(th) - HPD_R(-th)| " + fmt("%.4f dB", mirror_worst)));

  double ww_worst = 0.0;
  std::size_t ww_count = 0;
  bool notch_expected = false;
  double notch_hz = 0.0;
  for (const auto& row : *truth) {
    if (row.notch_hz > 0.0) {
      notch_expected = true;
      notch_hz = row.notch_hz;
    }
    const Direction& d = row.direction;
    if (d.elevation_deg != 0 || std::abs(d.azimuth_deg) > 90) continue;
    const auto it = itd.values.find(d);
    if (it == itd.values.end()) continue;
    ww_worst = std::max(ww_worst, std::abs(it->second - row.itd_true_s));
    ++ww_count;
  }
  report.checks.push_back(check("itd_woodworth", ww_count > 0 && ww_worst * 1e6 <= limits.woodworth_us,
                                "max |ITD - truth| " + fmt("%.2f us", ww_worst * 1e6) + " over " +
                                    std::to_string(ww_count) + " horizontal directions"));

  if (!notch_expected) {
    report.checks.push_back(skipped("notch_recovery", "truth records no injected notch"));
  } else {
    const auto entries = cues::median_plane_features(db, Ear::Right);
    std::size_t hits = 0;
    for (const auto& e : entries) {
      const bool hit = std::any_of(e.features.notches.begin(), e.features.notches.end(), [&](const auto& n) {
        return std::abs(n.frequency_hz - notch_hz) <= limits.notch_tolerance_hz;
      });
      hits += hit ? 1 : 0;
    }
    report.checks.push_back(check("notch_recovery", hits == entries.size(),
                                  std::to_string(hits) + "/" + std::to_string(entries.size()) +
                                      " median-plane PRTFs show a notch within " +
                                      fmt("%.0f Hz", limits.notch_tolerance_hz) + " of " +
                                      fmt("%.0f Hz", notch_hz)));
  }
  return report;
}

void print_report(std::ostream& out, const VerifyReport& report) {
  char buf[256];
  for (const auto& c : report.checks) {
    std::snprintf(buf, sizeof buf, "%-18s %-5s  %s\n", c.name.c_str(),
                  c.skipped ? "SKIP" : (c.passed ? "PASS" : "FAIL"), c.detail.c_str());
    out << buf;
  }
  out << (report.passed() ? "verify: all checks passed\n" : "verify: FAILED\n");
}

}  // namespace hrtfkit
