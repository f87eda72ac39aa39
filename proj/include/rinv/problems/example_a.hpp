#pragma once

// f(z) = (2 + z)^n - 2^n on the unit disc of C, viewed as a real plane.
// Df(z) and its right-inverse L(z) act by multiplication with n (2 + z)^{n-1}
// and n^{-1} (2 + z)^{1-n}.  The continuous selection through 0 is the
// principal branch g(Z) = 2((1 + 2^{-n} Z)^{1/n} - 1).

#include <rinv/error.hpp>
#include <rinv/local_solver.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace rinv {

using Complex = std::complex<double>;

}  // namespace rinv

namespace rinv::example_a {

inline void check_degree(int n) {
  if (n < 1) fail(Errc::domain, "example A: degree n must be >= 1");
}

/// log(1 + w) on the principal branch, accurate for small |w|.
inline Complex log1p(Complex w) {
  const double x = w.real();
  const double y = w.imag();
  return {0.5 * std::log1p(2.0 * x + x * x + y * y), std::atan2(y, 1.0 + x)};
}

/// exp(w) - 1, accurate for small |w|.
inline Complex expm1(Complex w) {
  const double x = w.real();
  const double y = w.imag();
  const double half_sin = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2.0 * half_sin * half_sin, std::exp(x) * std::sin(y)};
}

/// Unchecked evaluation 2^n ((1 + z/2)^n - 1), free of the cancellation in
/// (2 + z)^n - 2^n for small z.
inline Complex polynomial(int n, Complex z) {
  return std::ldexp(1.0, n) * expm1(static_cast<double>(n) * log1p(0.5 * z));
}

inline Complex evaluate(int n, Complex z) {
  check_degree(n);
  if (!(std::abs(z) < 1.0)) fail(Errc::domain, "example A: |z| >= 1 is outside the ball");
  return polynomial(n, z);
}

inline Complex derivative(int n, Complex z) {
  return static_cast<double>(n) * std::pow(2.0 + z, n - 1);
}

inline Complex right_inverse(int n, Complex z) {
  return std::pow(2.0 + z, 1 - n) / static_cast<double>(n);
}

inline Complex closed_inverse(int n, Complex target) {
  check_degree(n);
  const double scale = std::ldexp(1.0, n);
  if (!(std::abs(target) < scale)) {
    fail(Errc::domain, "example A closed form: |Z| must be below 2^n");
  }
  const Complex base = 1.0 + target / scale;
  // Principal branch is defined for arguments in (-pi, pi); the cut is base <= 0.
  if (base.imag() == 0.0 && base.real() <= 0.0) {
    fail(Errc::domain, "example A closed form: argument on the branch cut");
  }
  return 2.0 * expm1(log1p(target / scale) / static_cast<double>(n));
}

/// The local problem with R = 1 and the given bounds m, a.  sup |L| = 1/n on
/// the disc, so any m > 1/n is valid; Df(z) L(z) = I holds exactly.
inline LocalProblem<Complex> make_problem(int n, double m, double a) {
  check_degree(n);
  if (!(m > 1.0 / n)) fail(Errc::config, "example A: m must exceed 1/n");
  if (!(a >= 0.0 && a < 1.0)) fail(Errc::config, "example A: a must lie in [0, 1)");
  LocalProblem<Complex> p;
  p.evaluate_f = [n](const Complex& z) { return polynomial(n, z); };
  p.apply_df = [n](const Complex& z, const Complex& h) { return derivative(n, z) * h; };
  p.apply_l = [n](const Complex& z, const Complex& k) { return right_inverse(n, z) * k; };
  p.norm_x = [](const Complex& z) { return std::abs(z); };
  p.norm_y = [](const Complex& z) { return std::abs(z); };
  p.origin = Complex{};
  p.radius = 1.0;
  p.m = m;
  p.a = a;
  p.lip = n * std::pow(3.0, n - 1);
  p.exact_right_inverse = true;
  return p;
}

/// Default bounds m = 2/n, a = 1/2.
inline LocalProblem<Complex> make_problem(int n) { return make_problem(n, 2.0 / n, 0.5); }

/// sup |L| over the unit disc, attained at z = -1.
inline double sup_right_inverse(int n) { return 1.0 / n; }

}  // namespace rinv::example_a
