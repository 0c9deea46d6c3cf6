#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hrtfkit/hrtf_pipeline.hpp"
#include "hrtfkit/localization_cues.hpp"
#include "hrtfkit/synth_oracle.hpp"

namespace hrtfkit {

struct VerifyCheck {
  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool passed() const;
};

struct VerifyLimits {
  double continuity_us = 80.0;     // max ITD change between adjacent azimuths
  double woodworth_us = 26.0;      // horizontal plane, |theta| <= 90
  double mirror_db = 0.2;          // HPD left/right mirror symmetry
  double notch_tolerance_hz = 500.0;
};

// Truth-independent checks always run; truth-dependent ones are reported as
// skipped when `truth` is empty.
VerifyReport verify_database(const HrirDatabase& db,
                             const std::optional<std::vector<synth::TruthRow>>& truth,
                             const VerifyLimits& limits = {});

void print_report(std::ostream& out, const VerifyReport& report);

}  // namespace hrtfkit
