#include "hrtfkit/electroacoustics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hrtfkit/error.hpp"
#include "hrtfkit/special_functions.hpp"

namespace hrtfkit::electro {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPrefSpl = 20e-6;  // Pa

}  // namespace

double ThieleSmallParams::omega0() const { return kTwoPi * f0; }

ThieleSmallParams reference_driver() {
  ThieleSmallParams t;
  t.r_evc = 6.291;
  t.f0 = 101.221;
  t.s_d = 0.002827;
  t.k_rm = 0.010251;
  t.e_rm = 0.503;
  t.k_xm = 0.040639;
  t.e_xm = 0.392;
  t.v_as = 1.255e-3;
  t.c_ms = 0.001106;
  t.m_md = 2.150e-3;
  t.m_ms = 2.236e-3;
  t.bl = 3.265;
  t.q_ms = 4.531;
  t.q_es = 0.839;
  t.q_ts = 0.708;
  t.n0 = 0.150e-2;
  t.spl0 = 83.778;
  t.r_ms = kTwoPi * t.f0 * t.m_ms / t.q_ms;
  return t;
}

void validate(const ThieleSmallParams& t) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw PreconditionError(std::string("TSP ") + name + " must be positive");
  };
  positive(t.r_evc, "R_evc");
  positive(t.s_d, "S_d");
  positive(t.c_ms, "C_ms");
  positive(t.m_ms, "M_ms");
  positive(t.m_md, "M_md");
  positive(t.bl, "BL");
  positive(t.r_ms, "R_ms");
  if (t.k_rm < 0.0 || t.k_xm < 0.0) throw PreconditionError("TSP motor constants must be >= 0");
  auto exponent = [](double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) throw PreconditionError(std::string("TSP ") + name + " must lie in (0, 1)");
  };
  if (t.k_rm > 0.0) exponent(t.e_rm, "E_rm");
  if (t.k_xm > 0.0) exponent(t.e_xm, "E_xm");
}

ConsistencyReport check_consistency(const ThieleSmallParams& t, const AirProperties& air) {
  ConsistencyReport r;
  const double q_ts = t.q_ms * t.q_es / (t.q_ms + t.q_es);
  r.q_ts_rel_error = std::abs(t.q_ts - q_ts) / q_ts;
  const double f0 = 1.0 / (kTwoPi * std::sqrt(t.m_ms * t.c_ms));
  r.f0_rel_error = std::abs(t.f0 - f0) / f0;
  const double c = air.speed_of_sound;
  const double v_as = air.density * c * c * t.c_ms * t.s_d * t.s_d;
  r.v_as_rel_error = std::abs(t.v_as - v_as) / v_as;
  return r;
}

double piston_radius(double s_d) { return std::sqrt(s_d / std::numbers::pi); }

double piston_air_load_mass(double s_d, const AirProperties& air) {
  const double a = piston_radius(s_d);
  return 8.0 * air.density * a * a * a / 3.0;
}

RadiationImpedance radiation_impedance(double ka, double s_d, const AirProperties& air) {
  if (ka < 0.0 || std::isnan(ka)) throw PreconditionError("radiation_impedance: ka must be >= 0");
  if (!(s_d > 0.0)) throw PreconditionError("radiation_impedance: S_d must be positive");
  const double z0 = air.characteristic_impedance() / s_d;
  const double a = piston_radius(s_d);
  const double x = 2.0 * ka;
  RadiationImpedance rad;
  if (ka == 0.0) {
    rad.mass = z0 * 8.0 * a / (3.0 * std::numbers::pi * air.speed_of_sound);
    return rad;
  }
  // 1 - 2 J1(x)/x cancels badly for small x; use its Taylor series there.
  double one_minus;
  if (x < 0.1) {
    const double x2 = x * x;
    one_minus = x2 / 8.0 - x2 * x2 / 192.0 + x2 * x2 * x2 / 9216.0 - x2 * x2 * x2 * x2 / 737280.0;
  } else {
    one_minus = 1.0 - bessel_j1(x) / ka;
  }
  rad.resistance = z0 * one_minus;
  rad.reactance = z0 * struve_h1(x) / ka;
  const double omega = ka * air.speed_of_sound / a;
  rad.mass = rad.reactance / omega;
  return rad;
}

double box_compliance(double v_box, double s_d, const AirProperties& air) {
  if (!(v_box > 0.0)) throw PreconditionError("box_compliance: V_box must be positive");
  const double c = air.speed_of_sound;
  const double k_box = air.density * c * c * s_d * s_d / v_box;
  return s_d * s_d / k_box;
}

SealedModuleResponse simulate_sealed_module(const ThieleSmallParams& tsp,
                                            const SealedModuleConfig& config,
                                            const std::vector<double>& frequencies,
                                            const AirProperties& air) {
  if (!(config.v_box > 0.0)) throw PreconditionError("simulate_sealed_module: V_box must be positive");
  if (!(config.distance > 0.0)) throw PreconditionError("simulate_sealed_module: r must be positive");
  validate(tsp);
  const double rho_c = air.characteristic_impedance();
  const double c = air.speed_of_sound;
  const double s_d = tsp.s_d;
  const double a = piston_radius(s_d);

  const double current = config.v_eg / tsp.r_evc;
  const double p_ag = tsp.bl * current / s_d;
  const double r_avc = (tsp.bl / s_d) * (tsp.bl / s_d) / tsp.r_evc;
  const double r_as = tsp.r_ms / (s_d * s_d);
  const double c_as = tsp.c_ms * s_d * s_d;
  const double m_ad = tsp.m_md / (s_d * s_d);
  const double c_ab = box_compliance(config.v_box, s_d, air);
  const double path =
      std::sqrt(config.distance * config.distance + s_d / std::numbers::pi) - config.distance;

  SealedModuleResponse resp;
  resp.frequencies = frequencies;
  resp.config = config;
  resp.driving_pressure = p_ag;
  const std::size_t n = frequencies.size();
  resp.excursion.resize(n);
  resp.volume_velocity.resize(n);
  resp.acoustic_impedance.resize(n);
  resp.pressure.resize(n);
  resp.spl.resize(n);
  const std::complex<double> j(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = frequencies[i];
    if (!(f > 0.0)) throw PreconditionError("simulate_sealed_module: frequencies must be positive");
    const double w = kTwoPi * f;
    const RadiationImpedance rad = radiation_impedance(w / c * a, s_d, air);
    const std::complex<double> z = (r_avc + r_as + rad.resistance) + j * w * (m_ad + rad.mass) +
                                   1.0 / (j * w * c_as) + 1.0 / (j * w * c_ab);
    const std::complex<double> u = p_ag / z;
    resp.acoustic_impedance[i] = z;
    resp.volume_velocity[i] = u;
    resp.excursion[i] = u / (j * w * s_d);
    resp.pressure[i] = std::abs(u) * 2.0 * rho_c / s_d * std::abs(std::sin(w / (2.0 * c) * path));
    resp.spl[i] = 20.0 * std::log10(resp.pressure[i] / kPrefSpl);
  }
  return resp;
}

std::vector<double> log_frequency_grid(double f_lo, double f_hi, int points_per_octave) {
  if (!(f_lo > 0.0) || !(f_hi > f_lo) || points_per_octave <= 0) {
    throw PreconditionError("log_frequency_grid: need 0 < f_lo < f_hi and points_per_octave > 0");
  }
  const double octaves = std::log2(f_hi / f_lo);
  const auto steps = static_cast<int>(std::ceil(octaves * points_per_octave - 1e-9));
  std::vector<double> f(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) {
    f[static_cast<std::size_t>(i)] = f_lo * std::pow(f_hi / f_lo, static_cast<double>(i) / steps);
  }
  f.back() = f_hi;
  return f;
}

double rolloff_frequency(const std::vector<double>& frequencies, const std::vector<double>& spl,
                         double drop_db) {
  if (frequencies.size() != spl.size() || frequencies.size() < 2) {
    throw PreconditionError("rolloff_frequency: need matching frequency/SPL arrays");
  }
  const double reference = *std::max_element(spl.begin(), spl.end());
  const double threshold = reference - drop_db;
  if (spl.front() >= threshold) {
    throw DataError("rolloff_frequency: curve never falls " + std::to_string(drop_db) +
                    " dB below its maximum; no roll-off in band");
  }
  for (std::size_t i = 1; i < spl.size(); ++i) {
    if (spl[i] >= threshold) {
      const double t = (threshold - spl[i - 1]) / (spl[i] - spl[i - 1]);
      return frequencies[i - 1] + t * (frequencies[i] - frequencies[i - 1]);
    }
  }
  throw DataError("rolloff_frequency: curve never reaches reference level");
}

double rolloff_frequency(const SealedModuleResponse& resp, double drop_db) {
  return rolloff_frequency(resp.frequencies, resp.spl, drop_db);
}

ResponseSummary summarize(const SealedModuleResponse& resp, double drop_db) {
  ResponseSummary s;
  s.rolloff_hz = rolloff_frequency(resp, drop_db);
  for (std::size_t i = 0; i < resp.frequencies.size(); ++i) {
    const double x = std::abs(resp.excursion[i]);
    const double u = std::abs(resp.volume_velocity[i]);
    if (x > s.peak_excursion_m) {
      s.peak_excursion_m = x;
      s.peak_excursion_hz = resp.frequencies[i];
    }
    if (u > s.peak_velocity_m3s) {
      s.peak_velocity_m3s = u;
      s.peak_velocity_hz = resp.frequencies[i];
    }
  }
  return s;
}

std::vector<std::complex<double>> blocked_impedance(const ThieleSmallParams& tsp,
                                                    const std::vector<double>& frequencies) {
  std::vector<std::complex<double>> z(frequencies.size());
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    const double f = frequencies[i];
    if (!(f > 0.0)) throw PreconditionError("blocked_impedance: frequencies must be positive");
    const double w = kTwoPi * f;
    const double re = tsp.k_rm > 0.0 ? tsp.k_rm * std::pow(w, tsp.e_rm) : 0.0;
    const double im = tsp.k_xm > 0.0 ? tsp.k_xm * std::pow(w, tsp.e_xm) : 0.0;
    z[i] = {tsp.r_evc + re, im};
  }
  return z;
}

std::vector<std::complex<double>> motor_impedance(const ThieleSmallParams& tsp,
                                                  const std::vector<double>& frequencies,
                                                  double added_mass) {
  auto z = blocked_impedance(tsp, frequencies);
  if (tsp.bl == 0.0) return z;
  const std::complex<double> j(0.0, 1.0);
  const double m = tsp.m_ms + added_mass;
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    const double w = kTwoPi * frequencies[i];
    const std::complex<double> z_mech = tsp.r_ms + j * w * m + 1.0 / (j * w * tsp.c_ms);
    z[i] += tsp.bl * tsp.bl / z_mech;
  }
  return z;
}

ImpedanceCurve make_impedance_curve(const ThieleSmallParams& tsp,
                                    const std::vector<double>& frequencies, double added_mass,
                                    bool magnitude_only) {
  ImpedanceCurve curve;
  curve.frequencies = frequencies;
  curve.impedance = motor_impedance(tsp, frequencies, added_mass);
  curve.magnitude_only = magnitude_only;
  if (magnitude_only) {
    for (auto& z : curve.impedance) z = {std::abs(z), 0.0};
  }
  return curve;
}

}  // namespace hrtfkit::electro
