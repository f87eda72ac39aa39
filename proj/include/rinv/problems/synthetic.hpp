#pragma once

// Canonical loss-of-derivatives map on the periodic spectral scale:
//
//   F(u)     = S u + eps u^3,          S = diag(w(k)^{-l'})
//   DF(u) h  = S h + 3 eps u^2 h
//   L(u) k   = S^{-1} sum_{j < terms} P^j k,   P = I - DF(u) S^{-1}
//
// S^{-1} gains back l' derivatives only at the price of w(k)^{l'} growth, so
// the right-inverse loses l' orders of regularity.  Cubes are evaluated
// pseudo-spectrally on a dealiased grid.

#include <rinv/error.hpp>
#include <rinv/fft.hpp>
#include <rinv/local_solver.hpp>
#include <rinv/scale.hpp>
#include <rinv/tame.hpp>

#include <cmath>
#include <sstream>
#include <vector>

namespace rinv {

class SyntheticLossProblem {
 public:
  struct Options {
    double ell_prime = 2.0;
    double eps = 0.01;
    int neumann_terms = 40;
    double oversample = 2.0;
    double s0 = 1.0;
    // Certified by the randomized sweeps in tests/tame_problems_test.cpp
    // (u_radius 0.05, 16 active modes) and frozen here.
    double a_direct = 1.01;
    double b_inverse = 1.05;
  };

  SyntheticLossProblem(const ScaleSpec& spec, const Options& opts) : spec_(spec), opts_(opts) {
    if (!(opts.ell_prime >= 0.0)) fail(Errc::config, "synthetic: ell_prime must be >= 0");
    if (!(opts.eps >= 0.0)) fail(Errc::config, "synthetic: eps must be >= 0");
    if (opts.neumann_terms < 1) fail(Errc::config, "synthetic: neumann_terms must be >= 1");
    if (!(opts.oversample >= 2.0)) fail(Errc::config, "synthetic: oversample must be >= 2");
    constants_.s0 = opts.s0;
    constants_.m_loss = 0.0;
    constants_.ell = 0.0;
    constants_.ell_prime = opts.ell_prime;
    constants_.a_direct = opts.a_direct;
    constants_.b_inverse = opts.b_inverse;
  }
  explicit SyntheticLossProblem(const ScaleSpec& spec) : SyntheticLossProblem(spec, Options{}) {}

  const ScaleSpec& spec() const noexcept { return spec_; }
  const TameConstants& constants() const noexcept { return constants_; }
  const Options& options() const noexcept { return opts_; }
  int neumann_terms() const noexcept { return opts_.neumann_terms; }
  double eps() const noexcept { return opts_.eps; }

  /// lambda(k) = w(k)^{-l'} in (0, 1].
  double multiplier(long k) const { return std::pow(mode_weight(k), -opts_.ell_prime); }

  ScaleVector apply(const ScaleVector& u) const { return apply(u, opts_.oversample); }

  ScaleVector apply(const ScaleVector& u, double oversample) const {
    ScaleVector out = apply_weight_power(u, -opts_.ell_prime);
    if (opts_.eps != 0.0) out += opts_.eps * triple_product(u, u, u, oversample);
    return out;
  }

  ScaleVector apply_df(const ScaleVector& u, const ScaleVector& h) const {
    ScaleVector out = apply_weight_power(h, -opts_.ell_prime);
    if (opts_.eps != 0.0) out += (3.0 * opts_.eps) * triple_product(h, u, u, opts_.oversample);
    return out;
  }

  /// Exact inverse of the linear part; the base of the Neumann series.
  ScaleVector approximate_inverse(const ScaleVector& /*u*/, const ScaleVector& k) const {
    return apply_weight_power(k, opts_.ell_prime);
  }

  ScaleVector apply_l(const ScaleVector& u, const ScaleVector& k) const {
    if (opts_.eps == 0.0) return approximate_inverse(u, k);
    return neumann_right_inverse(base_problem(), u, k, opts_.neumann_terms);
  }

  /// Problem with L = S^{-1}, the uncorrected approximate right-inverse.
  LocalProblem<ScaleVector> base_problem() const {
    LocalProblem<ScaleVector> p;
    p.evaluate_f = [this](const ScaleVector& u) { return apply(u); };
    p.apply_df = [this](const ScaleVector& u, const ScaleVector& h) { return apply_df(u, h); };
    p.apply_l = [this](const ScaleVector& u, const ScaleVector& k) {
      return approximate_inverse(u, k);
    };
    const double s0 = constants_.s0;
    const double s0_target = s0 + constants_.ell_prime;
    p.norm_x = [s0](const ScaleVector& v) { return norm(v, s0); };
    p.norm_y = [s0_target](const ScaleVector& v) { return norm(v, s0_target); };
    p.origin = ScaleVector(spec_);
    return p;
  }

  /// Power-iteration surrogate for the spectral radius of P = I - DF(u) S^{-1}
  /// started from k: geometric mean of |P^{j} k| / |P^{j-1} k| over `iterations`.
  double neumann_contraction(const ScaleVector& u, const ScaleVector& k, int iterations = 8) const {
    const double s = constants_.s0;
    ScaleVector term = k;
    double log_sum = 0.0;
    for (int j = 0; j < iterations; ++j) {
      const double before = norm(term, s);
      if (before == 0.0) return 0.0;
      term = term - apply_df(u, approximate_inverse(u, term));
      const double after = norm(term, s);
      if (after == 0.0) return 0.0;
      log_sum += std::log(after / before);
      term *= 1.0 / after;
    }
    return std::exp(log_sum / iterations);
  }

  /// Throws Errc::inadmissible when the contraction surrogate reaches 1 at any sample.
  void ensure_neumann_admissible(const std::vector<ScaleVector>& points,
                                 const std::vector<ScaleVector>& directions) const {
    for (const auto& u : points) {
      for (const auto& k : directions) {
        const double rho = neumann_contraction(u, k);
        if (!(rho < 1.0)) {
          std::ostringstream msg;
          msg << "synthetic: Neumann surrogate spectral radius " << rho
              << " >= 1; eps = " << opts_.eps << " is inadmissible";
          fail(Errc::inadmissible, msg.str());
        }
      }
    }
  }

 private:
  ScaleSpec spec_;
  Options opts_;
  TameConstants constants_;
};

static_assert(TameMap<SyntheticLossProblem>);

}  // namespace rinv
