#include "hrtfkit/special_functions.hpp"

#include <cmath>
#include <numbers>

#include "hrtfkit/error.hpp"

namespace hrtfkit {
namespace {

constexpr double kJ1SeriesLimit = 12.0;
constexpr double kH1SeriesLimit = 16.0;

// sum_k (-1)^k (x/2)^(2k+1) / (k! (k+1)!)
double j1_series(double x) {
  const long double h = x / 2.0L;
  const long double h2 = h * h;
  long double term = h;
  long double sum = term;
  for (int k = 0; k < 200; ++k) {
    term *= -h2 / ((k + 1.0L) * (k + 2.0L));
    sum += term;
    if (std::fabs(term) < 1e-22L * std::fabs(sum)) break;
  }
  return static_cast<double>(sum);
}

// Hankel expansion: J1 = sqrt(2/(pi x)) (P cos chi - Q sin chi), chi = x - 3pi/4.
// a_k = prod_{j=1..k} (mu - (2j-1)^2) / (k! 8^k), mu = 4. Summed until the
// terms stop shrinking.
double j1_asymptotic(double x) {
  constexpr double mu = 4.0;
  double p = 1.0;
  double q = 0.0;
  double a = 1.0;  // a_k / x^k
  double last = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    a *= (mu - odd * odd) / (k * 8.0 * x);
    if (std::fabs(a) > last) break;
    last = std::fabs(a);
    // k odd feeds Q with sign (-1)^((k-1)/2); k even feeds P with sign (-1)^(k/2).
    if (k % 2 == 1) {
      q += ((k / 2) % 2 == 0 ? 1.0 : -1.0) * a;
    } else {
      p += ((k / 2) % 2 == 0 ? 1.0 : -1.0) * a;
    }
    if (last < 1e-17) break;
  }
  const double chi = x - 0.75 * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

// sum_k (-1)^k (x/2)^(2k+2) / (Gamma(k+3/2) Gamma(k+5/2))
double h1_series(double x) {
  const long double h = x / 2.0L;
  const long double h2 = h * h;
  const long double pi = std::numbers::pi_v<long double>;
  long double term = h2 / ((std::sqrt(pi) / 2.0L) * (3.0L * std::sqrt(pi) / 4.0L));
  long double sum = term;
  for (int k = 0; k < 400; ++k) {
    term *= -h2 / ((k + 1.5L) * (k + 2.5L));
    sum += term;
    if (std::fabs(term) < 1e-22L * std::fabs(sum) && k > static_cast<int>(h)) break;
  }
  return static_cast<double>(sum);
}

// H1 - Y1 ~ (1/pi) sum_k Gamma(k+1/2)/Gamma(3/2-k) (x/2)^(-2k)
double h1_asymptotic(double x) {
  const double inv = 4.0 / (x * x);
  double term = 2.0;  // Gamma(1/2)/Gamma(3/2)
  double sum = term;
  double last = std::fabs(term);
  for (int k = 0; k < 60; ++k) {
    term *= (k + 0.5) * (0.5 - k) * inv;
    if (std::fabs(term) > last) break;
    last = std::fabs(term);
    sum += term;
    if (last < 1e-17) break;
  }
  return std::cyl_neumann(1.0, x) + sum / std::numbers::pi;
}

}  // namespace

double bessel_j1(double x) {
  if (x < 0.0 || std::isnan(x)) throw PreconditionError("bessel_j1: argument must be >= 0");
  if (x == 0.0) return 0.0;
  return x < kJ1SeriesLimit ? j1_series(x) : j1_asymptotic(x);
}

double struve_h1(double x) {
  if (x < 0.0 || std::isnan(x)) throw PreconditionError("struve_h1: argument must be >= 0");
  if (x == 0.0) return 0.0;
  return x < kH1SeriesLimit ? h1_series(x) : h1_asymptotic(x);
}

}  // namespace hrtfkit
