#pragma once

// Synthetic measurement sets with known ground truth.
//
// Each ear receives a band-limited pulse delayed by the spherical-head path
// (direct path on the lit side, creeping wave around the sphere on the shadow
// side), optionally low-passed by a head-shadow filter, notched by a
// parametric "pinna" filter, coloured by the loudspeaker, and followed by a
// late reflection. All filters have short, known support so the pipeline's
// windows capture every sample of the direct sound.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hrtfkit/direction.hpp"
#include "hrtfkit/electroacoustics.hpp"
#include "hrtfkit/hrtf_pipeline.hpp"

namespace hrtfkit::synth {

struct SphericalHeadModel {
  double head_radius = 0.0875;     // a_h, m
  double speed_of_sound = 343.0;   // m/s
  double source_distance = 1.1;    // m, source to head centre
  double sample_rate = kDefaultSampleRate;
  double shadow_strength = 0.9;    // high-frequency loss at the far pole, 0..1
};

struct NotchSpec {
  double center_hz = 9000.0;
  double depth_db = 15.0;
};

struct ReflectionSpec {
  int offset_samples = 300;  // after the direct pulse; at least 5 ms
  double gain = 0.3;
};

struct SynthOptions {
  SphericalHeadModel model;
  std::optional<NotchSpec> notch;
  std::optional<ReflectionSpec> reflection;
  double noise_rms = 0.0;  // additive Gaussian noise, per sample
  std::uint64_t seed = 1;
  std::size_t length = kRawLength;
};

// Causal FIR standing in for the loudspeaker + measurement chain.
class SpeakerColoration {
 public:
  static SpeakerColoration flat();

  // Minimum-phase FIR whose magnitude follows `magnitude_db` (interpolated in
  // log frequency, floored `dynamic_range_db` below its maximum), truncated
  // to `taps` with a short fade-out.
  static SpeakerColoration minimum_phase(const std::vector<double>& frequencies,
                                         const std::vector<double>& magnitude_db,
                                         double sample_rate = kDefaultSampleRate, int taps = 64,
                                         double dynamic_range_db = 20.0);

  // The sealed-module SPL curve of the reference driver in an 800 cc box.
  static SpeakerColoration sealed_module(double sample_rate = kDefaultSampleRate);

  const std::vector<double>& taps() const { return taps_; }

 private:
  explicit SpeakerColoration(std::vector<double> taps) : taps_(std::move(taps)) {}
  std::vector<double> taps_;
};

// Angle between the source ray and the ear's radius vector, radians.
double ear_angle(const Direction& d, Ear ear);

// Arrival time relative to the head centre: -(a/c) cos(gamma) on the lit side,
// (a/c)(gamma - pi/2) in the shadow.
double ear_delay(const Direction& d, Ear ear, const SphericalHeadModel& model);

// ear_delay(left) - ear_delay(right); positive for sources on the right.
double itd_true(const Direction& d, const SphericalHeadModel& model);

// Woodworth's horizontal-plane formula (a/c)(sin(theta) + theta) for
// |theta| <= 90 degrees, sign following theta.
double woodworth_itd(double azimuth_deg, const SphericalHeadModel& model);

// Integer sample index of the direct sound at the head centre: round(r/c * F_s).
int bulk_delay_samples(const SphericalHeadModel& model);

BinauralPair synth_bir(const Direction& d, const SynthOptions& opt, const SpeakerColoration& col);
ImpulseResponse synth_oir(int elevation_deg, const SynthOptions& opt, const SpeakerColoration& col);

// Full set for `grid`, generated in parallel; identical for any thread count.
RawMeasurementSet synth_set(const SynthOptions& opt, const SpeakerColoration& col,
                            const MeasurementGrid& grid = MeasurementGrid::standard());

struct TruthRow {
  Direction direction;
  double itd_true_s = 0.0;
  double notch_hz = 0.0;        // 0 when no notch was injected
  long reflection_sample = -1;  // raw-buffer index of the earliest reflected pulse, -1 if none
};

std::vector<TruthRow> truth_table(const SynthOptions& opt,
                                  const MeasurementGrid& grid = MeasurementGrid::standard());
void write_truth_csv(const std::string& path, const std::vector<TruthRow>& rows);
std::vector<TruthRow> read_truth_csv(const std::string& path);

}  // namespace hrtfkit::synth
