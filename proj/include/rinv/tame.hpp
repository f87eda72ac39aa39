#pragma once

// Interface of a map F between tame scales together with randomized sweeps
// that measure the tame direct / inverse estimates, the right- and
// left-inverse identities and the modulus of differentiability.  The sweeps
// only falsify: a worst ratio below the frozen constant is evidence, not proof.

#include <rinv/scale.hpp>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <random>
#include <vector>

namespace rinv {

/// Grading constants of an S-tame differentiable map with tame right-inverse.
struct TameConstants {
  double s0 = 1.0;
  double m_loss = 0.0;     // loss of DF
  double ell = 0.0;        // loss of L in u
  double ell_prime = 2.0;  // loss of L in k
  double a_direct = 1.0;   // constant of the direct estimate
  double b_inverse = 1.0;  // constant of the inverse estimate
};

template <class P>
concept TameMap = requires(const P& p, const ScaleVector& u) {
  { p.spec() } -> std::convertible_to<ScaleSpec>;
  { p.constants() } -> std::convertible_to<TameConstants>;
  { p.apply(u) } -> std::same_as<ScaleVector>;
  { p.apply_df(u, u) } -> std::same_as<ScaleVector>;
  { p.apply_l(u, u) } -> std::same_as<ScaleVector>;
  { p.approximate_inverse(u, u) } -> std::same_as<ScaleVector>;
  { p.neumann_terms() } -> std::convertible_to<int>;
};

/// Shape of the random inputs used by the sweeps.
struct SweepOptions {
  double u_radius = 0.05;  // |u|_{s0 + max(m, ell)} drawn uniformly from (0, u_radius)
  long active_modes = 16;
  double min_decay = 1.0;
  double max_decay = 4.0;
};

namespace detail {

template <class Rng>
ScaleVector sweep_vector(const ScaleSpec& spec, Rng& rng, const SweepOptions& opts,
                         double grading, double norm_value) {
  std::uniform_real_distribution<double> decay(opts.min_decay, opts.max_decay);
  return random_scale_vector(spec, rng, opts.active_modes, decay(rng), grading, norm_value);
}

}  // namespace detail

/// max |DF(u) h|'_s / (|h|_{s+m} + |u|_{s+m} |h|_{s0+m}) over random (u, h, s).
template <TameMap P, class Rng>
double verify_tame_direct(const P& p, int trials, Rng& rng, const SweepOptions& opts = {}) {
  const TameConstants c = p.constants();
  const ScaleSpec spec = p.spec();
  const double s_hi = spec.s_max - c.m_loss;
  std::uniform_real_distribution<double> grading(c.s0, s_hi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const double s = grading(rng);
    const ScaleVector u = detail::sweep_vector(spec, rng, opts, c.s0 + std::max(c.m_loss, c.ell),
                                               opts.u_radius * unit(rng));
    const ScaleVector h = detail::sweep_vector(spec, rng, opts, s, 1.0);
    const double lhs = norm(p.apply_df(u, h), s);
    const double rhs = norm(h, s + c.m_loss) + norm(u, s + c.m_loss) * norm(h, c.s0 + c.m_loss);
    worst = std::max(worst, lhs / rhs);
  }
  return worst;
}

/// max |L(u) k|_s / (|k|'_{s+l'} + |k|'_{s0+l'} |u|_{s+l}) over random (u, k, s).
template <TameMap P, class Rng>
double verify_tame_inverse(const P& p, int trials, Rng& rng, const SweepOptions& opts = {}) {
  const TameConstants c = p.constants();
  const ScaleSpec spec = p.spec();
  const double s_hi = spec.s_max - std::max(c.ell, c.ell_prime);
  std::uniform_real_distribution<double> grading(c.s0, s_hi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const double s = grading(rng);
    const ScaleVector u = detail::sweep_vector(spec, rng, opts, c.s0 + std::max(c.m_loss, c.ell),
                                               opts.u_radius * unit(rng));
    const ScaleVector k = detail::sweep_vector(spec, rng, opts, s + c.ell_prime, 1.0);
    const double lhs = norm(p.apply_l(u, k), s);
    const double rhs =
        norm(k, s + c.ell_prime) + norm(k, c.s0 + c.ell_prime) * norm(u, s + c.ell);
    worst = std::max(worst, lhs / rhs);
  }
  return worst;
}

/// max |DF(u) L(u) k - k|'_{s0} / |k|'_{s0}.
template <TameMap P, class Rng>
double right_inverse_defect(const P& p, int trials, Rng& rng, const SweepOptions& opts = {}) {
  const TameConstants c = p.constants();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const ScaleVector u = detail::sweep_vector(p.spec(), rng, opts,
                                               c.s0 + std::max(c.m_loss, c.ell),
                                               opts.u_radius * unit(rng));
    const ScaleVector k = detail::sweep_vector(p.spec(), rng, opts, c.s0, 1.0);
    const ScaleVector defect = p.apply_df(u, p.apply_l(u, k)) - k;
    worst = std::max(worst, norm(defect, c.s0) / norm(k, c.s0));
  }
  return worst;
}

/// max |L(u) DF(u) h - h|_{s0} / |h|_{s0}.
template <TameMap P, class Rng>
double left_inverse_defect(const P& p, int trials, Rng& rng, const SweepOptions& opts = {}) {
  const TameConstants c = p.constants();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const ScaleVector u = detail::sweep_vector(p.spec(), rng, opts,
                                               c.s0 + std::max(c.m_loss, c.ell),
                                               opts.u_radius * unit(rng));
    const ScaleVector h = detail::sweep_vector(p.spec(), rng, opts, c.s0, 1.0);
    const ScaleVector defect = p.apply_l(u, p.apply_df(u, h)) - h;
    worst = std::max(worst, norm(defect, c.s0) / norm(h, c.s0));
  }
  return worst;
}

/// Ratios |F(u + t h) - F(u) - DF(u)(t h)|'_s / |t h|_{s0+m} for each factor t.
template <TameMap P>
std::vector<double> modulus_ladder(const P& p, const ScaleVector& u, const ScaleVector& h,
                                   double s, const std::vector<double>& factors) {
  const TameConstants c = p.constants();
  const ScaleVector fu = p.apply(u);
  std::vector<double> ratios;
  ratios.reserve(factors.size());
  for (double t : factors) {
    const ScaleVector step = t * h;
    const ScaleVector remainder = p.apply(u + step) - fu - p.apply_df(u, step);
    ratios.push_back(norm(remainder, s) / norm(step, c.s0 + c.m_loss));
  }
  return ratios;
}

/// Relative error between central differences (F(u + d h) - F(u - d h)) / 2d
/// and DF(u) h, measured in `measure`.
template <class F, class DF, class U, class Norm>
double finite_difference_error(const F& f, const DF& df, const U& u, const U& h, double d,
                               const Norm& measure) {
  const U plus = u + d * h;
  const U minus = u - d * h;
  // Materialised as U: valarray arithmetic yields expression templates that
  // would outlive the temporaries they reference.
  const U fd = (1.0 / (2.0 * d)) * (f(plus) - f(minus));
  const U exact = df(u, h);
  const double scale = measure(exact);
  const double diff = measure(fd - exact);
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace rinv
