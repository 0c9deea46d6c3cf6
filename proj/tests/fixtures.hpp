#pragma once

// Lazily built synthetic data shared by the test binaries. Each accessor
// builds its object once per process.

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "hrtfkit/hrtf_pipeline.hpp"
#include "hrtfkit/synth_oracle.hpp"

namespace fixtures {

const hrtfkit::synth::SynthOptions& default_options();
const hrtfkit::RawMeasurementSet& raw_set();              // sealed-module coloration
const hrtfkit::HrirDatabase& database();                  // compensated, m = 48
const hrtfkit::HrirDatabase& uncompensated_database();

// Scratch directory under the system temp dir, emptied on creation.
std::string scratch_dir(const std::string& name);

// Independent O(N^2) DFT, used as an oracle for the FFT-backed transforms.
std::vector<std::complex<double>> naive_dft(const std::vector<double>& x);

}  // namespace fixtures
