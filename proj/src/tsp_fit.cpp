// Delta-mass identification of Thiele-Small parameters.
//
// The classic added-mass identities give a starting point from the two
// resonance peaks alone. Those identities ignore the lossy voice-coil
// inductance, so their estimates drift by a few percent; a joint least-squares
// fit of the full impedance model to both curves removes that bias.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>

#include "hrtfkit/electroacoustics.hpp"
#include "hrtfkit/error.hpp"

namespace hrtfkit::electro {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kMinPoints = 50;
constexpr double kMaxRmsResidual = 0.05;

using Vec = Eigen::VectorXd;
using ResidualFn = std::function<Vec(const Vec&)>;

struct LmOutcome {
  Vec p;
  double cost = 0.0;
  int iterations = 0;
};

Eigen::MatrixXd numeric_jacobian(const ResidualFn& fn, const Vec& p, Eigen::Index rows) {
  Eigen::MatrixXd jac(rows, p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(p[k]));
    Vec up = p;
    Vec dn = p;
    up[k] += h;
    dn[k] -= h;
    jac.col(k) = (fn(up) - fn(dn)) / (2.0 * h);
  }
  return jac;
}

// Levenberg-Marquardt with Marquardt's diagonal scaling.
LmOutcome levenberg_marquardt(const ResidualFn& fn, Vec p, int max_iter = 300) {
  Vec r = fn(p);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  int it = 0;
  for (; it < max_iter; ++it) {
    const Eigen::MatrixXd jac = numeric_jacobian(fn, p, r.size());
    const Eigen::MatrixXd a = jac.transpose() * jac;
    const Vec g = jac.transpose() * r;
    bool accepted = false;
    Vec step;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::MatrixXd damped = a;
      for (Eigen::Index k = 0; k < a.rows(); ++k) {
        damped(k, k) += lambda * std::max(a(k, k), 1e-12);
      }
      step = damped.ldlt().solve(-g);
      const Vec trial = p + step;
      const Vec rt = fn(trial);
      const double ct = rt.squaredNorm();
      if (std::isfinite(ct) && ct < cost) {
        const double gain = cost - ct;
        p = trial;
        r = rt;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (gain < 1e-15 * cost) return {p, ct, it + 1};
        cost = ct;
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted) break;
    if (step.lpNorm<Eigen::Infinity>() < 1e-11 * (1.0 + p.lpNorm<Eigen::Infinity>())) {
      ++it;
      break;
    }
  }
  return {p, cost, it};
}

void check_curve(const ImpedanceCurve& c, const char* which) {
  const std::string name(which);
  if (c.frequencies.size() != c.impedance.size()) {
    throw PreconditionError(name + " impedance curve: frequency and impedance lengths differ");
  }
  if (c.frequencies.size() < kMinPoints) {
    throw PreconditionError(name + " impedance curve needs at least " + std::to_string(kMinPoints) +
                            " points");
  }
  for (std::size_t i = 0; i < c.frequencies.size(); ++i) {
    if (!(c.frequencies[i] > 0.0) || !std::isfinite(std::abs(c.impedance[i]))) {
      throw PreconditionError(name + " impedance curve has a non-positive frequency or bad value");
    }
    if (i > 0 && !(c.frequencies[i] > c.frequencies[i - 1])) {
      throw PreconditionError(name + " impedance curve frequencies must be strictly ascending");
    }
  }
}

struct Peak {
  double freq = 0.0;
  double magnitude = 0.0;
  std::size_t index = 0;
};

// Largest |Z| refined by a parabola through three points in (log f, |Z|).
Peak find_peak(const ImpedanceCurve& c, const char* which) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < c.frequencies.size(); ++i) {
    if (c.magnitude(i) > c.magnitude(best)) best = i;
  }
  if (best == 0 || best + 1 == c.frequencies.size()) {
    throw DataError(std::string(which) + " impedance curve has no interior resonance peak");
  }
  const double x0 = std::log(c.frequencies[best - 1]);
  const double x1 = std::log(c.frequencies[best]);
  const double x2 = std::log(c.frequencies[best + 1]);
  const double y0 = c.magnitude(best - 1);
  const double y1 = c.magnitude(best);
  const double y2 = c.magnitude(best + 1);
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double curv = (d12 - d01) / (x2 - x0);  // half the second derivative
  Peak pk{c.frequencies[best], y1, best};
  if (curv < 0.0) {
    const double xv = 0.5 * (x0 + x1) - d01 / (2.0 * curv);
    const double slope_at_x1 = d01 + curv * (x1 - x0);
    pk.freq = std::exp(xv);
    pk.magnitude = y1 + slope_at_x1 * (xv - x1) + curv * (xv - x1) * (xv - x1);
  }
  return pk;
}

// Frequency at which |Z| falls to `level` walking away from the peak.
double crossing(const ImpedanceCurve& c, std::size_t peak, double level, int dir) {
  long i = static_cast<long>(peak);
  const long n = static_cast<long>(c.frequencies.size());
  while (i + dir >= 0 && i + dir < n) {
    const long j = i + dir;
    const double mi = c.magnitude(static_cast<std::size_t>(i));
    const double mj = c.magnitude(static_cast<std::size_t>(j));
    if (mj <= level) {
      const double t = (mi - level) / (mi - mj);
      const double fi = c.frequencies[static_cast<std::size_t>(i)];
      const double fj = c.frequencies[static_cast<std::size_t>(j)];
      return fi + t * (fj - fi);
    }
    i = j;
  }
  throw DataError("impedance curve does not fall to sqrt(r0)*R_evc on both sides of the peak");
}

void fill_derived(ThieleSmallParams& t, double s_d, const AirProperties& air) {
  const double c = air.speed_of_sound;
  t.s_d = s_d;
  t.f0 = 1.0 / (kTwoPi * std::sqrt(t.m_ms * t.c_ms));
  const double w0 = t.omega0();
  t.q_ms = w0 * t.m_ms / t.r_ms;
  t.q_es = w0 * t.m_ms * t.r_evc / (t.bl * t.bl);
  t.q_ts = t.q_ms * t.q_es / (t.q_ms + t.q_es);
  t.v_as = air.density * c * c * t.c_ms * s_d * s_d;
  t.m_md = t.m_ms - piston_air_load_mass(s_d, air);
  t.n0 = 4.0 * std::numbers::pi * std::numbers::pi * t.f0 * t.f0 * t.f0 * t.v_as /
         (c * c * c * t.q_es);
  // 1 W into half space, observed at 1 m.
  const double p_rms = std::sqrt(air.characteristic_impedance() * t.n0 / (2.0 * std::numbers::pi));
  t.spl0 = 20.0 * std::log10(p_rms / 20e-6);
}

// Model parameters in fitting coordinates: positive quantities by logarithm.
enum Slot { kRevc, kBl, kMms, kCms, kRms, kKrm, kErm, kKxm, kExm, kSlots };

Vec to_vector(const ThieleSmallParams& t) {
  Vec p(kSlots);
  p[kRevc] = std::log(t.r_evc);
  p[kBl] = std::log(t.bl);
  p[kMms] = std::log(t.m_ms);
  p[kCms] = std::log(t.c_ms);
  p[kRms] = std::log(t.r_ms);
  p[kKrm] = std::log(t.k_rm);
  p[kErm] = t.e_rm;
  p[kKxm] = std::log(t.k_xm);
  p[kExm] = t.e_xm;
  return p;
}

ThieleSmallParams from_vector(const Vec& p) {
  ThieleSmallParams t;
  t.r_evc = std::exp(p[kRevc]);
  t.bl = std::exp(p[kBl]);
  t.m_ms = std::exp(p[kMms]);
  t.c_ms = std::exp(p[kCms]);
  t.r_ms = std::exp(p[kRms]);
  t.k_rm = std::exp(p[kKrm]);
  t.e_rm = p[kErm];
  t.k_xm = std::exp(p[kKxm]);
  t.e_xm = p[kExm];
  return t;
}

std::complex<double> model_z(const ThieleSmallParams& t, double f, double added_mass) {
  const double w = kTwoPi * f;
  const std::complex<double> j(0.0, 1.0);
  const std::complex<double> z_mech = t.r_ms + j * w * (t.m_ms + added_mass) + 1.0 / (j * w * t.c_ms);
  return std::complex<double>(t.r_evc + t.k_rm * std::pow(w, t.e_rm), t.k_xm * std::pow(w, t.e_xm)) +
         t.bl * t.bl / z_mech;
}

struct CurveView {
  const ImpedanceCurve* curve;
  double added_mass;
  double f_min;  // only points above f_min contribute
};

Eigen::Index residual_count(const std::vector<CurveView>& views) {
  Eigen::Index n = 0;
  for (const auto& v : views) {
    for (double f : v.curve->frequencies) {
      if (f > v.f_min) n += v.curve->magnitude_only ? 1 : 2;
    }
  }
  return n;
}

// Relative misfit: complex curves contribute (Re, Im) / |Z|, magnitude-only
// curves (|Z_model| - |Z|) / |Z|.
Vec residuals(const ThieleSmallParams& t, const std::vector<CurveView>& views, Eigen::Index count) {
  Vec r(count);
  Eigen::Index k = 0;
  for (const auto& v : views) {
    const auto& c = *v.curve;
    for (std::size_t i = 0; i < c.frequencies.size(); ++i) {
      if (!(c.frequencies[i] > v.f_min)) continue;
      const std::complex<double> zm = model_z(t, c.frequencies[i], v.added_mass);
      const double scale = c.magnitude(i);
      if (c.magnitude_only) {
        r[k++] = (std::abs(zm) - scale) / scale;
      } else {
        const std::complex<double> d = (zm - c.impedance[i]) / scale;
        r[k++] = d.real();
        r[k++] = d.imag();
      }
    }
  }
  return r;
}

double rms_of(const ThieleSmallParams& t, const ImpedanceCurve& c, double added_mass) {
  std::vector<CurveView> v{{&c, added_mass, 0.0}};
  const Eigen::Index n = residual_count(v);
  return std::sqrt(residuals(t, v, n).squaredNorm() / static_cast<double>(n));
}

// Power-law initial guess y = k w^e from the first and last usable points.
void two_point_power_law(double w1, double y1, double w2, double y2, double& k, double& e) {
  if (y1 > 0.0 && y2 > 0.0 && w2 > w1) {
    e = std::clamp(std::log(y2 / y1) / std::log(w2 / w1), 0.05, 0.95);
    k = y1 / std::pow(w1, e);
  } else {
    e = 0.5;
    k = std::max(std::max(y1, y2), 1e-3) / std::sqrt(w2);
  }
}

}  // namespace

TspFitResult fit_tsp_delta_mass(const ImpedanceCurve& free_air, const ImpedanceCurve& mass_loaded,
                                double delta_mass, double s_d, const AirProperties& air) {
  if (!(delta_mass > 0.0)) throw PreconditionError("fit_tsp_delta_mass: added mass must be positive");
  if (!(s_d > 0.0)) throw PreconditionError("fit_tsp_delta_mass: S_d must be positive");
  check_curve(free_air, "free-air");
  check_curve(mass_loaded, "mass-loaded");

  const Peak pf = find_peak(free_air, "free-air");
  const Peak pm = find_peak(mass_loaded, "mass-loaded");
  if (!(pm.freq < pf.freq)) {
    throw DataError("mass-loaded resonance (" + std::to_string(pm.freq) +
                    " Hz) is not below the free-air resonance (" + std::to_string(pf.freq) + " Hz)");
  }

  // Voice-coil resistance: the floor of the real part, or of |Z| when only
  // magnitudes are known.
  double r_evc = std::abs(free_air.impedance[0]);
  for (std::size_t i = 0; i < free_air.frequencies.size(); ++i) {
    const double v = free_air.magnitude_only ? free_air.magnitude(i) : free_air.impedance[i].real();
    r_evc = std::min(r_evc, v);
  }
  if (!(r_evc > 0.0) || !(pf.magnitude > r_evc)) {
    throw DataError("free-air curve has no resonance rise above its resistive floor");
  }

  ThieleSmallParams cf;
  cf.r_evc = r_evc;
  const double ratio = pf.freq / pm.freq;
  cf.m_ms = delta_mass / (ratio * ratio - 1.0);
  const double w0 = kTwoPi * pf.freq;
  cf.c_ms = 1.0 / (w0 * w0 * cf.m_ms);
  const double r0 = pf.magnitude / r_evc;
  const double level = std::sqrt(r0) * r_evc;
  const double f1 = crossing(free_air, pf.index, level, -1);
  const double f2 = crossing(free_air, pf.index, level, +1);
  const double q_ms = pf.freq * std::sqrt(r0) / (f2 - f1);
  cf.r_ms = w0 * cf.m_ms / q_ms;
  cf.bl = std::sqrt((pf.magnitude - r_evc) * cf.r_ms);

  // Lossy-inductance tail, fitted above 5*F0 with the motional part held.
  const double f_tail = 5.0 * pf.freq;
  {
    std::size_t first = free_air.frequencies.size();
    for (std::size_t i = 0; i < free_air.frequencies.size(); ++i) {
      if (free_air.frequencies[i] > f_tail) {
        first = i;
        break;
      }
    }
    const std::size_t last = free_air.frequencies.size() - 1;
    if (first + 4 > last) throw DataError("free-air curve has too few points above 5*F0 for the tail fit");
    ThieleSmallParams bare = cf;
    bare.k_rm = bare.k_xm = 0.0;
    bare.e_rm = bare.e_xm = 0.5;
    auto excess = [&](std::size_t i) {
      return free_air.impedance[i] - model_z(bare, free_air.frequencies[i], 0.0);
    };
    const double wa = kTwoPi * free_air.frequencies[first];
    const double wb = kTwoPi * free_air.frequencies[last];
    if (free_air.magnitude_only) {
      const double ma = free_air.magnitude(first);
      const double mb = free_air.magnitude(last);
      const double xa = std::sqrt(std::max(ma * ma - r_evc * r_evc, 1e-9));
      const double xb = std::sqrt(std::max(mb * mb - r_evc * r_evc, 1e-9));
      two_point_power_law(wa, xa, wb, xb, cf.k_xm, cf.e_xm);
      cf.k_rm = 0.25 * cf.k_xm;
      cf.e_rm = cf.e_xm;
    } else {
      two_point_power_law(wa, excess(first).real(), wb, excess(last).real(), cf.k_rm, cf.e_rm);
      two_point_power_law(wa, excess(first).imag(), wb, excess(last).imag(), cf.k_xm, cf.e_xm);
    }

    const std::vector<CurveView> tail{{&free_air, 0.0, f_tail}, {&mass_loaded, delta_mass, f_tail}};
    const Eigen::Index n = residual_count(tail);
    const Vec full = to_vector(cf);
    const ResidualFn fn = [&](const Vec& q) {
      Vec p = full;
      p[kKrm] = q[0];
      p[kErm] = q[1];
      p[kKxm] = q[2];
      p[kExm] = q[3];
      return residuals(from_vector(p), tail, n);
    };
    Vec q0(4);
    q0 << full[kKrm], full[kErm], full[kKxm], full[kExm];
    const LmOutcome tail_fit = levenberg_marquardt(fn, q0);
    if (!tail_fit.p.allFinite()) throw DataError("voice-coil inductance tail fit did not converge");
    cf.k_rm = std::exp(tail_fit.p[0]);
    cf.e_rm = tail_fit.p[1];
    cf.k_xm = std::exp(tail_fit.p[2]);
    cf.e_xm = tail_fit.p[3];
  }
  fill_derived(cf, s_d, air);

  const std::vector<CurveView> both{{&free_air, 0.0, 0.0}, {&mass_loaded, delta_mass, 0.0}};
  const Eigen::Index n = residual_count(both);
  const ResidualFn fn = [&](const Vec& p) { return residuals(from_vector(p), both, n); };
  const LmOutcome joint = levenberg_marquardt(fn, to_vector(cf));
  if (!joint.p.allFinite()) throw DataError("joint impedance fit produced non-finite parameters");

  TspFitResult result;
  result.closed_form = cf;
  result.params = from_vector(joint.p);
  fill_derived(result.params, s_d, air);
  result.resonance_free_hz = pf.freq;
  result.resonance_mass_hz = pm.freq;
  result.rms_residual_free = rms_of(result.params, free_air, 0.0);
  result.rms_residual_mass = rms_of(result.params, mass_loaded, delta_mass);
  result.iterations = joint.iterations;
  if (result.rms_residual_free > kMaxRmsResidual || result.rms_residual_mass > kMaxRmsResidual) {
    throw DataError("impedance fit did not converge: relative rms misfit " +
                    std::to_string(std::max(result.rms_residual_free, result.rms_residual_mass)));
  }
  return result;
}

}  // namespace hrtfkit::electro
