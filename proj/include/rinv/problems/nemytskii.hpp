#pragma once

// Superposition operator u -> phi o u on a periodic collocation grid, with
// phi' bounded above and below by positive constants.  The derivative and its
// right-inverse are pointwise multiplications by phi'(u) and 1 / phi'(u); the
// exact inverse is psi o v with psi = phi^{-1}, computed pointwise by a
// bracketed Newton iteration.

#include <rinv/error.hpp>
#include <rinv/local_solver.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <valarray>

namespace rinv::nemytskii {

using GridFunction = std::valarray<double>;

struct NemytskiiProblem {
  std::function<double(double)> phi;
  std::function<double(double)> phi_prime;
  std::size_t grid_size = 1024;
  double inf_phi_prime = 0.0;
  double sup_phi_prime = 0.0;
};

/// phi(t) = t + amplitude sin t, so phi' lies in [1 - amplitude, 1 + amplitude].
inline NemytskiiProblem sine_perturbed(double amplitude = 0.45, std::size_t grid_size = 1024) {
  if (!(amplitude >= 0.0 && amplitude < 1.0)) {
    fail(Errc::config, "nemytskii: amplitude must lie in [0, 1)");
  }
  if (grid_size == 0) fail(Errc::config, "nemytskii: grid_size must be positive");
  NemytskiiProblem p;
  p.phi = [amplitude](double t) { return t + amplitude * std::sin(t); };
  p.phi_prime = [amplitude](double t) { return 1.0 + amplitude * std::cos(t); };
  p.grid_size = grid_size;
  p.inf_phi_prime = 1.0 - amplitude;
  p.sup_phi_prime = 1.0 + amplitude;
  return p;
}

inline void check_grid(const NemytskiiProblem& p, const GridFunction& u) {
  if (u.size() != p.grid_size) {
    std::ostringstream msg;
    msg << "nemytskii: grid function has " << u.size() << " points, expected " << p.grid_size;
    fail(Errc::domain, msg.str());
  }
}

inline GridFunction apply(const NemytskiiProblem& p, const GridFunction& u) {
  check_grid(p, u);
  GridFunction out(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) out[j] = p.phi(u[j]);
  return out;
}

inline GridFunction apply_derivative(const NemytskiiProblem& p, const GridFunction& u,
                                     const GridFunction& h) {
  check_grid(p, u);
  check_grid(p, h);
  GridFunction out(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) out[j] = p.phi_prime(u[j]) * h[j];
  return out;
}

inline GridFunction apply_right_inverse(const NemytskiiProblem& p, const GridFunction& u,
                                        const GridFunction& k) {
  check_grid(p, u);
  check_grid(p, k);
  GridFunction out(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) out[j] = k[j] / p.phi_prime(u[j]);
  return out;
}

/// Root of phi(t) = value.  phi(0) = 0 and phi' in [lo, hi] give the bracket
/// between value / hi and value / lo.
inline double invert_scalar(const NemytskiiProblem& p, double value) {
  if (value == 0.0) return 0.0;
  const double t1 = value / p.sup_phi_prime;
  const double t2 = value / p.inf_phi_prime;
  double lo = std::min(t1, t2);
  double hi = std::max(t1, t2);
  const double tol = 1e-14 * std::max(1.0, std::abs(value));
  double t = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double g = p.phi(t) - value;
    if (std::abs(g) <= tol) return t;
    if (g > 0.0) hi = t; else lo = t;
    double next = t - g / p.phi_prime(t);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == t || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(t)) {
      return next;
    }
    t = next;
  }
  fail(Errc::oracle_failure, "nemytskii: scalar inversion did not converge");
}

inline GridFunction exact_inverse(const NemytskiiProblem& p, const GridFunction& v) {
  check_grid(p, v);
  if (!(p.inf_phi_prime > 0.0)) {
    fail(Errc::domain, "nemytskii: exact inverse needs inf phi' > 0");
  }
  GridFunction out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) out[j] = invert_scalar(p, v[j]);
  return out;
}

inline double sup_norm(const GridFunction& u) {
  double out = 0.0;
  for (double x : u) out = std::max(out, std::abs(x));
  return out;
}

/// Local problem with sup norms.  sup |L| = 1 / inf phi' and the whole space is
/// admissible for any R, so the caller chooses R and m > 1 / inf phi'.
inline LocalProblem<GridFunction> make_problem(const NemytskiiProblem& p, double radius,
                                               double m, double a) {
  if (!(m > 1.0 / p.inf_phi_prime)) fail(Errc::config, "nemytskii: m must exceed 1/inf phi'");
  if (!(a >= 0.0 && a < 1.0)) fail(Errc::config, "nemytskii: a must lie in [0, 1)");
  LocalProblem<GridFunction> lp;
  lp.evaluate_f = [p](const GridFunction& u) { return apply(p, u); };
  lp.apply_df = [p](const GridFunction& u, const GridFunction& h) {
    return apply_derivative(p, u, h);
  };
  lp.apply_l = [p](const GridFunction& u, const GridFunction& k) {
    return apply_right_inverse(p, u, k);
  };
  lp.norm_x = sup_norm;
  lp.norm_y = sup_norm;
  lp.origin = GridFunction(0.0, p.grid_size);
  lp.radius = radius;
  lp.m = m;
  lp.a = a;
  lp.lip = p.sup_phi_prime;
  lp.exact_right_inverse = true;
  return lp;
}

/// Defaults used by the CLI and the acceptance suite: R = 8, m = 4, a = 1/2.
inline LocalProblem<GridFunction> make_problem(const NemytskiiProblem& p) {
  return make_problem(p, 8.0, 4.0, 0.5);
}

/// Smooth random periodic field sum_{k=1..modes} (a_k cos kx + b_k sin kx) / k
/// on x_j = 2 pi j / N, rescaled to sup norm `amplitude`.
template <class Rng>
GridFunction random_field(std::size_t grid_size, Rng& rng, int modes, double amplitude) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  GridFunction out(0.0, grid_size);
  for (int k = 1; k <= modes; ++k) {
    const double a = gauss(rng) / k;
    const double b = gauss(rng) / k;
    for (std::size_t j = 0; j < grid_size; ++j) {
      const double x = 2.0 * std::numbers::pi * static_cast<double>(j) / grid_size;
      out[j] += a * std::cos(k * x) + b * std::sin(k * x);
    }
  }
  const double peak = sup_norm(out);
  if (peak > 0.0) out *= amplitude / peak;
  return out;
}

}  // namespace rinv::nemytskii
