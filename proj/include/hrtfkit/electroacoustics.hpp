#pragma once

// Lumped-element model of a sealed speaker module: Thiele-Small parameters,
// the acoustic equivalent circuit, and the driver's electrical impedance.

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

namespace hrtfkit::electro {

struct AirProperties {
  double density = 1.21;         // rho0, kg/m^3
  double speed_of_sound = 343.0;  // c, m/s

  double characteristic_impedance() const { return density * speed_of_sound; }
};

// SI units throughout (ohm, Hz, m^2, m^3, m/N, kg, T*m). N_0 is a fraction.
struct ThieleSmallParams {
  double r_evc = 0.0;  // voice coil resistance
  double f0 = 0.0;     // free-air resonance
  double s_d = 0.0;    // diaphragm area
  double k_rm = 0.0;   // motor resistance constant, used as k_rm * w^e_rm
  double e_rm = 0.0;
  double k_xm = 0.0;   // motor reactance constant, used as k_xm * w^e_xm
  double e_xm = 0.0;
  double v_as = 0.0;   // equivalent air volume of the suspension
  double c_ms = 0.0;
  double m_md = 0.0;   // moving mass without air load
  double m_ms = 0.0;   // moving mass with air load
  double bl = 0.0;
  double q_ms = 0.0;
  double q_es = 0.0;
  double q_ts = 0.0;
  double n0 = 0.0;     // half-space reference efficiency
  double spl0 = 0.0;   // dB SPL, 1 W at 1 m, half space
  double r_ms = 0.0;   // mechanical suspension resistance, N*s/m

  double omega0() const;
};

// The published measurement of the 3" full-range driver used in the speaker
// array; r_ms is derived as 2*pi*F0*M_ms/Q_ms.
ThieleSmallParams reference_driver();

// Throws PreconditionError if any physical quantity is non-positive or an
// exponent lies outside (0, 1).
void validate(const ThieleSmallParams& tsp);

struct ConsistencyReport {
  double q_ts_rel_error = 0.0;  // Q_ts vs Q_ms*Q_es/(Q_ms+Q_es)
  double f0_rel_error = 0.0;    // F_0 vs 1/(2*pi*sqrt(M_ms*C_ms))
  double v_as_rel_error = 0.0;  // V_as vs rho0*c^2*C_ms*S_d^2
};
ConsistencyReport check_consistency(const ThieleSmallParams& tsp, const AirProperties& air = {});

// Piston radius a = sqrt(S_d / pi).
double piston_radius(double s_d);

// Low-frequency, single-sided air load of a baffled piston: 8*rho0*a^3/3 (kg).
double piston_air_load_mass(double s_d, const AirProperties& air = {});

struct RadiationImpedance {
  double resistance = 0.0;  // R_ar, acoustic ohm
  double reactance = 0.0;   // X_ar, acoustic ohm
  double mass = 0.0;        // M_ar = X_ar / w, kg/m^4
};
RadiationImpedance radiation_impedance(double ka, double s_d, const AirProperties& air = {});

// Acoustic compliance of the sealed box: S_d^2 / k_box with
// k_box = rho0 c^2 S_d^2 / V_box, i.e. V_box / (rho0 c^2).
double box_compliance(double v_box, double s_d, const AirProperties& air = {});

struct SealedModuleConfig {
  double v_box = 800e-6;  // m^3
  double v_eg = 2.828;    // V rms
  double distance = 1.0;  // m, on-axis microphone distance
};

struct SealedModuleResponse {
  std::vector<double> frequencies;
  std::vector<std::complex<double>> excursion;         // X(w), m
  std::vector<std::complex<double>> volume_velocity;   // U_a(w), m^3/s
  std::vector<std::complex<double>> acoustic_impedance;  // Z_as(w)
  std::vector<double> pressure;                        // |p(w, r)|, Pa rms
  std::vector<double> spl;                             // dB re 20 uPa
  double driving_pressure = 0.0;                       // P_ag, Pa
  SealedModuleConfig config;
};

SealedModuleResponse simulate_sealed_module(const ThieleSmallParams& tsp,
                                            const SealedModuleConfig& config,
                                            const std::vector<double>& frequencies,
                                            const AirProperties& air = {});

// `points_per_octave` log-spaced points from f_lo to f_hi inclusive.
std::vector<double> log_frequency_grid(double f_lo = 20.0, double f_hi = 20000.0,
                                       int points_per_octave = 48);

// Lowest frequency at which SPL first rises to (max SPL - drop_db), scanning
// upward with linear interpolation between grid points.
double rolloff_frequency(const std::vector<double>& frequencies, const std::vector<double>& spl,
                         double drop_db = 6.0);
double rolloff_frequency(const SealedModuleResponse& resp, double drop_db = 6.0);

struct ResponseSummary {
  double rolloff_hz = 0.0;
  double peak_excursion_m = 0.0;
  double peak_excursion_hz = 0.0;
  double peak_velocity_m3s = 0.0;
  double peak_velocity_hz = 0.0;
};
ResponseSummary summarize(const SealedModuleResponse& resp, double drop_db = 6.0);

// ---- electrical impedance ----------------------------------------------

struct ImpedanceCurve {
  std::vector<double> frequencies;
  // Complex impedance; for magnitude-only curves the real part holds |Z|.
  std::vector<std::complex<double>> impedance;
  bool magnitude_only = false;

  double magnitude(std::size_t i) const { return std::abs(impedance[i]); }
};

// R_evc + K_rm w^E_rm + j K_xm w^E_xm (lossy voice-coil inductance only).
std::vector<std::complex<double>> blocked_impedance(const ThieleSmallParams& tsp,
                                                    const std::vector<double>& frequencies);

// Blocked impedance + BL^2 / (R_ms + j w (M_ms + added_mass) + 1/(j w C_ms)).
std::vector<std::complex<double>> motor_impedance(const ThieleSmallParams& tsp,
                                                  const std::vector<double>& frequencies,
                                                  double added_mass = 0.0);

ImpedanceCurve make_impedance_curve(const ThieleSmallParams& tsp,
                                    const std::vector<double>& frequencies,
                                    double added_mass = 0.0, bool magnitude_only = false);

struct TspFitResult {
  ThieleSmallParams params;        // refined joint fit
  ThieleSmallParams closed_form;   // added-mass identities + tail fit only
  double resonance_free_hz = 0.0;  // peak of |Z|, free curve
  double resonance_mass_hz = 0.0;  // peak of |Z|, mass-loaded curve
  double rms_residual_free = 0.0;  // relative rms misfit of the final model
  double rms_residual_mass = 0.0;
  int iterations = 0;
};

// Delta-mass identification. Throws PreconditionError for delta_mass <= 0 or
// unusable curves, DataError for a missing peak, a non-lowered resonance, or
// a fit that fails to converge.
TspFitResult fit_tsp_delta_mass(const ImpedanceCurve& free_air, const ImpedanceCurve& mass_loaded,
                                double delta_mass, double s_d, const AirProperties& air = {});

// ---- file formats ------------------------------------------------------

// CSV `freq_hz, re_ohm, im_ohm` or `freq_hz, mag_ohm`; an optional header line
// is skipped. `force_magnitude_only` treats a 3-column file's |Z| only.
ImpedanceCurve read_impedance_csv(const std::string& path, bool force_magnitude_only = false);
void write_impedance_csv(const std::string& path, const ImpedanceCurve& curve);

// Flat key=value text, one Table-1 quantity per line, SI units noted in a
// trailing comment.
void write_tsp(std::ostream& out, const ThieleSmallParams& tsp);
void write_tsp_file(const std::string& path, const ThieleSmallParams& tsp);
ThieleSmallParams read_tsp(std::istream& in);
ThieleSmallParams read_tsp_file(const std::string& path);

// CSV `freq_hz, excursion_mm, volume_velocity_m3s, spl_db`.
void write_response_csv(const std::string& path, const SealedModuleResponse& resp);

}  // namespace hrtfkit::electro
