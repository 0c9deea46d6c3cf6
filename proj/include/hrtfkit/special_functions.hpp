#pragma once

namespace hrtfkit {

// First-order Bessel function of the first kind, x >= 0.
// Power series (long double) below x = 12, Hankel asymptotic expansion above;
// |err| < 1e-8.
double bessel_j1(double x);

// First-order Struve function, x >= 0.
// Power series below x = 16; above, H1 = Y1 + (1/pi) * asymptotic sum.
// |err| < 1e-6.
double struve_h1(double x);

}  // namespace hrtfkit
