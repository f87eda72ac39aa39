#pragma once

// Galerkin iteration for F(u) = v on tame scales with loss of derivatives.
//
// With cutoffs Lambda_n = Lambda_0 sigma^n, level n solves the projected
// equation Pi'_n F(u_n) = Pi'_{n-1} v for u_n = u_{n-1} + z_n in E_n, where
//
//   f_n(z)      = Pi'_n (F(u_{n-1} + z) - F(u_{n-1}))
//   Delta_n v   = Pi'_{n-1} (1 - Pi'_{n-2}) v
//   e_n         = -Pi'_n (1 - Pi'_{n-1}) F(u_{n-1})
//   f_n(z_n)    = Delta_n v + e_n
//
// Base cases: Pi'_{-1} = 0 and u_0 = 0, so Delta_1 v = Pi'_0 v and e_1 = 0.
// Each level equation is handed to the local descent solver on E_n with the
// right-inverse Pi_n S^{-1} Pi'_n corrected by a Neumann series; both the
// increment and the level residual are measured at grading s0.

#include <rinv/error.hpp>
#include <rinv/local_solver.hpp>
#include <rinv/scale.hpp>
#include <rinv/tame.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace rinv {

struct NashMoserConfig {
  double s0 = 1.0;
  double s1 = 3.0;
  double delta = 5.5;
  double lambda0 = 1.0;
  double sigma = 2.0;
  int levels = 10;
  double r = 100.0;  // radius of the admissible target ball in |.|'_delta

  // Level solver.
  double inner_radius = 4.0;       // ball of E_n (|.|_{s0}) on which f_n is considered
  double inner_a = 0.5;            // lower bound used for the defect constant a_n
  double inner_m_factor = 1.25;    // m_n = factor * sampled sup |L_n|
  double inner_tol = 1e-12;
  double inner_abs_tol = 1e-13;
  int inner_max_steps = 200;
  int inner_samples = 4;           // random directions per level for the assumption probe
  std::uint64_t seed = 1;

  double cutoff(int n) const { return lambda0 * std::pow(sigma, n); }

  /// Grading and schedule requirements; `uniqueness` adds the stronger
  /// s1 >= s0 + max(2m + l', m + l).
  void validate(const TameConstants& c, const ScaleSpec& spec, bool uniqueness = false) const {
    std::ostringstream msg;
    if (!(s0 >= c.s0)) msg << "s0 below the problem's s0; ";
    if (!(s1 >= s0 + std::max(c.m_loss, c.ell))) msg << "s1 < s0 + max(m, l); ";
    if (uniqueness && !(s1 >= s0 + std::max(2.0 * c.m_loss + c.ell_prime, c.m_loss + c.ell))) {
      msg << "s1 < s0 + max(2m + l', m + l); ";
    }
    if (!(delta > s1 + c.ell_prime)) msg << "delta must exceed s1 + l'; ";
    if (!(spec.s_max >= delta)) msg << "scale s_max below delta; ";
    if (!(lambda0 >= 1.0)) msg << "lambda0 must be >= 1; ";
    if (!(sigma > 1.0)) msg << "sigma must exceed 1; ";
    if (levels < 1) msg << "levels must be >= 1; ";
    else if (!(cutoff(levels) <= spec.max_weight())) {
      msg << "schedule Lambda_N = " << cutoff(levels) << " exceeds w(k_max) = "
          << spec.max_weight() << "; ";
    }
    if (!(r > 0.0)) msg << "r must be positive; ";
    if (!(inner_a >= 0.0 && inner_a < 1.0)) msg << "inner_a must lie in [0, 1); ";
    if (!(inner_m_factor > 1.0)) msg << "inner_m_factor must exceed 1; ";
    if (!msg.str().empty()) fail(Errc::config, "NashMoserConfig: " + msg.str());
  }
};

/// Pi'_n with Pi'_{-1} = 0.
inline ScaleVector level_projection(const ScaleVector& v, int n, const NashMoserConfig& cfg) {
  if (n < 0) return ScaleVector(v.spec());
  return project(v, cfg.cutoff(n));
}

/// Delta_n v = Pi'_{n-1} (1 - Pi'_{n-2}) v, the annulus between cutoffs n-2 and n-1.
inline ScaleVector delta_v(const ScaleVector& v, int n, const NashMoserConfig& cfg) {
  if (n < 1) fail(Errc::domain, "delta_v: level must be >= 1");
  return level_projection(v, n - 1, cfg) - level_projection(v, n - 2, cfg);
}

/// e_n = -Pi'_n (1 - Pi'_{n-1}) F(u_prev).
template <TameMap P>
ScaleVector defect_e(const P& problem, const ScaleVector& u_prev, int n,
                     const NashMoserConfig& cfg) {
  if (n < 1) fail(Errc::domain, "defect_e: level must be >= 1");
  const ScaleVector image = problem.apply(u_prev);
  return level_projection(image, n - 1, cfg) - level_projection(image, n, cfg);
}

struct InnerSolve {
  ScaleVector z;
  SolveResult<ScaleVector> trace;
  double m = 0.0;
  double a = 0.0;
  double sup_l = 0.0;
  double max_defect = 0.0;
};

/// Level problem f_n on E_n around u_prev with the Neumann-corrected
/// right-inverse.  `base_image` is F(u_prev).
template <TameMap P>
LocalProblem<ScaleVector> level_problem(const P& problem, const ScaleVector& u_prev,
                                        const ScaleVector& base_image, int n,
                                        const NashMoserConfig& cfg) {
  const double cut = cfg.cutoff(n);
  const double s0 = cfg.s0;

  LocalProblem<ScaleVector> base;
  base.evaluate_f = [&problem, u_prev, base_image, cut](const ScaleVector& z) {
    return project(problem.apply(u_prev + z) - base_image, cut);
  };
  base.apply_df = [&problem, u_prev, cut](const ScaleVector& z, const ScaleVector& h) {
    return project(problem.apply_df(u_prev + z, project(h, cut)), cut);
  };
  base.apply_l = [&problem, u_prev, cut](const ScaleVector& z, const ScaleVector& k) {
    return project(problem.approximate_inverse(u_prev + z, project(k, cut)), cut);
  };
  base.norm_x = [s0](const ScaleVector& v) { return norm(v, s0); };
  base.norm_y = [s0](const ScaleVector& v) { return norm(v, s0); };
  base.origin = ScaleVector(u_prev.spec());
  base.radius = cfg.inner_radius;

  LocalProblem<ScaleVector> corrected = base;
  const int terms = problem.neumann_terms();
  corrected.apply_l = [base, terms](const ScaleVector& z, const ScaleVector& k) {
    return neumann_right_inverse(base, z, k, terms);
  };
  return corrected;
}

/// Solves f_n(z) = rhs on E_n.  The assumption constants m_n, a_n are
/// re-sampled on E_n along the predicted increment and in random directions.
/// Throws Errc::non_convergence (level failure) or Errc::out_of_radius.
template <TameMap P>
InnerSolve inner_solve(const P& problem, const ScaleVector& u_prev, const ScaleVector& rhs,
                       int n, const NashMoserConfig& cfg) {
  InnerSolve out{ScaleVector(u_prev.spec()), {}, 0.0, 0.0, 0.0, 0.0};
  const ScaleVector base_image = problem.apply(u_prev);
  LocalProblem<ScaleVector> lp = level_problem(problem, u_prev, base_image, n, cfg);
  const double rhs_norm = lp.norm_y(rhs);
  if (rhs_norm <= cfg.inner_abs_tol) {
    out.trace.x = out.z;
    out.trace.start = out.z;
    out.trace.residuals = {rhs_norm};
    out.trace.times = {0.0};
    out.trace.x_norms = {0.0};
    out.trace.converged = true;
    out.trace.bound_ok = true;
    out.trace.status = SolveStatus::converged;
    return out;
  }

  // Probe points: the origin and multiples of the linearized increment.
  const ScaleVector predicted = lp.apply_l(lp.origin, rhs);
  std::vector<ScaleVector> points{lp.origin, 0.5 * predicted, predicted, 1.5 * predicted};
  std::vector<ScaleVector> directions{rhs};
  std::mt19937_64 rng(cfg.seed * 1000003ULL + static_cast<std::uint64_t>(n));
  const long top = std::max<long>(ProjectorFamily{u_prev.spec()}.highest_kept_mode(cfg.cutoff(n)), 0);
  for (int i = 0; i < cfg.inner_samples; ++i) {
    directions.push_back(project(random_scale_vector(u_prev.spec(), rng, top, 0.0, cfg.s0, 1.0),
                                 cfg.cutoff(n)));
  }
  const AssumptionReport report =
      sample_assumptions<ScaleVector, ScaleVector>(lp, points, directions, 1e-3);
  out.sup_l = report.sup_l_ratio;
  out.max_defect = report.max_defect;
  if (!(report.max_defect < 1.0) || !std::isfinite(report.sup_l_ratio)) {
    std::ostringstream msg;
    msg << "level " << n << ": sampled right-inverse defect " << report.max_defect
        << " is not below 1";
    fail(Errc::inadmissible, msg.str());
  }
  lp.a = std::max(cfg.inner_a, report.max_defect);
  lp.m = cfg.inner_m_factor * std::max(report.sup_l_ratio, 1e-300);
  out.a = lp.a;
  out.m = lp.m;

  DescentConfig dc = make_descent_config(lp.a, lp.m, report.sup_l_ratio, 1.0);
  dc.tol = cfg.inner_tol;
  dc.abs_tol = cfg.inner_abs_tol;
  dc.max_steps = cfg.inner_max_steps;

  out.trace = solve_local(lp, rhs, dc);
  if (!out.trace.converged) {
    std::ostringstream msg;
    msg << "level " << n << ": inner solve " << to_string(out.trace.status) << " after "
        << out.trace.attempts << " attempts, residual " << out.trace.residuals.back();
    fail(Errc::non_convergence, msg.str());
  }
  out.z = out.trace.x;
  return out;
}

struct LevelState {
  int n = 0;
  double cutoff = 0.0;
  ScaleVector u;        // G_n(v)
  ScaleVector z;        // H_n(v)
  ScaleVector e;
  ScaleVector delta_v;
  double z_norm_s1 = 0.0;
  double e_norm_s0 = 0.0;
  double identity_residual = 0.0;  // |Pi'_n F(u_n) - Pi'_{n-1} v|'_{s0}
  double g_norm_s1 = 0.0;
  std::size_t inner_steps = 0;
  double inner_m = 0.0;
  double inner_a = 0.0;
};

struct NashMoserResult {
  std::vector<LevelState> levels;
  ScaleVector g;
  bool converged = false;
  std::optional<int> failed_level;
  std::string failure;
  Errc failure_code = Errc::non_convergence;
  double v_norm_delta = 0.0;
  bool bound_ok = false;  // |G(v)|_{s1} <= |v|'_delta / r (1 + 1e-6)
};

template <TameMap P>
NashMoserResult run(const P& problem, const ScaleVector& v, const NashMoserConfig& cfg) {
  cfg.validate(problem.constants(), problem.spec());
  NashMoserResult out;
  out.g = ScaleVector(v.spec());
  out.v_norm_delta = norm(v, cfg.delta);
  if (!(out.v_norm_delta < cfg.r)) {
    std::ostringstream msg;
    msg << "nash-moser: |v|'_delta = " << out.v_norm_delta << " is not below r = " << cfg.r;
    fail(Errc::out_of_radius, msg.str());
  }

  ScaleVector u(v.spec());
  for (int n = 1; n <= cfg.levels; ++n) {
    LevelState state;
    state.n = n;
    state.cutoff = cfg.cutoff(n);
    state.delta_v = delta_v(v, n, cfg);
    state.e = defect_e(problem, u, n, cfg);
    try {
      const InnerSolve inner = inner_solve(problem, u, state.delta_v + state.e, n, cfg);
      state.z = inner.z;
      state.inner_steps = inner.trace.accepted_steps();
      state.inner_m = inner.m;
      state.inner_a = inner.a;
    } catch (const Error& err) {
      out.failed_level = n;
      out.failure = err.what();
      out.failure_code = err.code();
      out.g = u;
      return out;
    }
    u += state.z;
    state.u = u;
    state.z_norm_s1 = norm(state.z, cfg.s1);
    state.e_norm_s0 = norm(state.e, cfg.s0);
    state.identity_residual = norm(
        level_projection(problem.apply(u), n, cfg) - level_projection(v, n - 1, cfg), cfg.s0);
    state.g_norm_s1 = norm(u, cfg.s1);
    out.levels.push_back(std::move(state));
  }
  out.g = u;
  out.converged = true;
  out.bound_ok = norm(u, cfg.s1) <= out.v_norm_delta / cfg.r * (1.0 + 1e-6);
  return out;
}

/// exp of the least-squares slope of log(values[i]) against i, over the
/// entries above `floor`; NaN when fewer than two entries qualify.
inline double fit_geometric_ratio(const std::vector<double>& values, double floor = 0.0) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > floor) pts.emplace_back(static_cast<double>(i), std::log(values[i]));
  }
  if (pts.size() < 2) return std::nan("");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) { mx += x; my += y; }
  mx /= pts.size();
  my /= pts.size();
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  return std::exp(sxy / sxx);
}

/// Sampled evidence for the uniqueness hypotheses: the left-inverse identity
/// and a strictly decreasing modulus-of-differentiability ladder.
struct UniquenessCertificate {
  double left_inverse_defect = 0.0;
  bool modulus_decreasing = false;
  double tolerance = 1e-9;

  bool holds() const noexcept { return left_inverse_defect <= tolerance && modulus_decreasing; }
};

struct UniquenessReport {
  double max_deviation = 0.0;
  std::vector<double> deviations;     // per grid point, NaN when excluded
  std::vector<std::size_t> excluded;  // points where either run failed
};

/// max over the grid of |G_A(v) - G_B(v)|_{s1} for two schedules.
template <TameMap P>
UniquenessReport uniqueness_suite(const P& problem, const std::vector<ScaleVector>& grid,
                                  const NashMoserConfig& cfg_a, const NashMoserConfig& cfg_b,
                                  const UniquenessCertificate& certificate) {
  cfg_a.validate(problem.constants(), problem.spec(), true);
  cfg_b.validate(problem.constants(), problem.spec(), true);
  if (!certificate.holds()) {
    fail(Errc::inadmissible, "uniqueness_suite: left-inverse / modulus certificate not satisfied");
  }
  const double s1 = std::min(cfg_a.s1, cfg_b.s1);
  UniquenessReport out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::optional<ScaleVector> ga;
    std::optional<ScaleVector> gb;
    try {
      auto ra = run(problem, grid[i], cfg_a);
      auto rb = run(problem, grid[i], cfg_b);
      if (ra.converged) ga = std::move(ra.g);
      if (rb.converged) gb = std::move(rb.g);
    } catch (const Error&) {
    }
    if (!ga || !gb) {
      out.excluded.push_back(i);
      out.deviations.push_back(std::nan(""));
      continue;
    }
    const double dev = norm(*ga - *gb, s1);
    out.deviations.push_back(dev);
    out.max_deviation = std::max(out.max_deviation, dev);
  }
  return out;
}

/// |G(v + dv) - G(v)|_{s1} / |dv|'_delta.
template <TameMap P>
double continuity_ratio(const P& problem, const ScaleVector& v, const ScaleVector& dv,
                        const NashMoserConfig& cfg) {
  const auto base = run(problem, v, cfg);
  const auto moved = run(problem, v + dv, cfg);
  if (!base.converged || !moved.converged) {
    fail(Errc::non_convergence, "continuity_ratio: a run failed");
  }
  return norm(moved.g - base.g, cfg.s1) / norm(dv, cfg.delta);
}

/// Largest rho in [lo, hi] (bisection on |t direction|'_delta = rho) for which
/// every level converges; the empirical radius r.
template <TameMap P>
double estimate_radius(const P& problem, const ScaleVector& direction, NashMoserConfig cfg,
                       double lo, double hi, int iterations = 20) {
  const double unit = norm(direction, cfg.delta);
  if (unit == 0.0) fail(Errc::domain, "estimate_radius: zero direction");
  cfg.r = std::numeric_limits<double>::infinity();
  auto converges = [&](double rho) {
    try {
      return run(problem, (rho / unit) * direction, cfg).converged;
    } catch (const Error&) {
      return false;
    }
  };
  if (!converges(lo)) return 0.0;
  if (converges(hi)) return hi;
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (converges(mid)) lo = mid; else hi = mid;
  }
  return lo;
}

/// CSV rows: n, Lambda_n, |z_n|_{s1}, |e_n|'_{s0}, level identity residual, |G_n(v)|_{s1}.
inline void write_levels_csv(std::ostream& out, const NashMoserResult& result) {
  const auto old_precision = out.precision(17);
  out << "n,lambda,z_norm_s1,e_norm_s0,identity_residual,g_norm_s1\n";
  for (const auto& level : result.levels) {
    out << level.n << ',' << level.cutoff << ',' << level.z_norm_s1 << ',' << level.e_norm_s0
        << ',' << level.identity_residual << ',' << level.g_norm_s1 << '\n';
  }
  out.precision(old_precision);
}

}  // namespace rinv
