#pragma once

// Right-inverse descent flow for f(x) = y on a ball B(0, R).
//
// The flow dx/dt = L(x)(y - f(x)) is integrated by explicit Euler.  A step of
// length h is accepted only when the residual drops by the factor
// (1 - (1 - a') h / 2); otherwise h is halved.  Admissibility of the target
// (|y| < (1 - a) R / m) and the a-priori bound |x| <= m / (1 - a) |y| are
// enforced and reported as runtime contracts.

#include <rinv/error.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <vector>

namespace rinv {

template <class Point, class Target = Point>
struct LocalProblem {
  using point_type = Point;
  using target_type = Target;

  std::function<Target(const Point&)> evaluate_f;
  std::function<Target(const Point&, const Point&)> apply_df;
  std::function<Point(const Point&, const Target&)> apply_l;
  std::function<double(const Point&)> norm_x;
  std::function<double(const Target&)> norm_y;

  Point origin{};
  double radius = 1.0;  // R
  double m = 1.0;       // strict upper bound for sup |L(x)|
  double a = 0.5;       // approximation defect of Df(x') L(x)
  double lip = std::numeric_limits<double>::infinity();
  // Df(x) L(x) = I holds exactly on the ball.  The admissible target radius
  // is then R / m instead of (1 - a) R / m.
  bool exact_right_inverse = false;

  double guaranteed_factor() const noexcept { return m / (1.0 - a); }

  /// Radius of the admissible target ball around f(x0) for a point x0 with |x0| = x0_norm.
  double local_radius(double x0_norm) const noexcept {
    const double slack = std::max(radius - x0_norm, 0.0);
    return exact_right_inverse ? slack / m : (1.0 - a) * slack / m;
  }
  double admissible_radius() const noexcept { return local_radius(0.0); }
};

struct DescentConfig {
  double step = 0.5;
  double a_prime = 0.75;
  double tol = 1e-12;      // relative to the initial residual
  double abs_tol = 0.0;    // absolute floor on the stopping threshold
  int max_steps = 2000;    // accepted + rejected step attempts
  double tau = 1.0;        // horizon of the decay contract
  bool line_search = true;

  void validate(double a) const {
    std::ostringstream msg;
    if (!(step > 0.0)) msg << "step must be positive; ";
    if (!(step <= tau)) msg << "step " << step << " exceeds tau " << tau << "; ";
    if (!(a < a_prime && a_prime < 1.0)) msg << "a_prime must lie in (a, 1); ";
    if (!(tol > 0.0)) msg << "tol must be positive; ";
    if (!(abs_tol >= 0.0)) msg << "abs_tol must be nonnegative; ";
    if (max_steps < 1) msg << "max_steps must be >= 1; ";
    if (!msg.str().empty()) fail(Errc::config, "DescentConfig: " + msg.str());
  }
};

/// Defaults: a' = (1 + a) / 2, m0 midway between the sampled sup |L| and m,
/// tau = (m - m0) / ((1 - a') m0).
inline DescentConfig make_descent_config(double a, double m, double sup_l, double step = 0.5) {
  DescentConfig cfg;
  cfg.a_prime = 0.5 * (1.0 + a);
  const double m0 = 0.5 * (sup_l + m);
  cfg.tau = (m - m0) / ((1.0 - cfg.a_prime) * m0);
  cfg.step = std::min(step, cfg.tau);
  return cfg;
}

enum class SolveStatus { converged, max_steps, radius_breach, stalled };

inline const char* to_string(SolveStatus status) noexcept {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_steps: return "max_steps";
    case SolveStatus::radius_breach: return "radius_breach";
    case SolveStatus::stalled: return "stalled";
  }
  return "unknown";
}

template <class Point>
struct SolveResult {
  Point x{};
  Point start{};
  std::vector<double> residuals;  // |y - f(x)| after each accepted step, [0] = initial
  std::vector<double> times;      // flow time of each record
  std::vector<double> x_norms;
  double flow_time = 0.0;
  double tau = 0.0;
  double tol = 0.0;
  double target_distance = 0.0;  // |y - f(start)|
  int attempts = 0;
  int rejected = 0;
  bool bound_ok = false;
  bool converged = false;
  SolveStatus status = SolveStatus::max_steps;

  std::size_t accepted_steps() const noexcept {
    return residuals.empty() ? 0 : residuals.size() - 1;
  }
};

/// One explicit Euler step x + h L(x)(y - f(x)).  Throws radius_breach when
/// the result leaves the open R-ball.
template <class Point, class Target>
Point descent_step(const LocalProblem<Point, Target>& problem, const Point& x,
                   const Target& y, double h) {
  if (!(h > 0.0)) fail(Errc::domain, "descent_step: h must be positive");
  const Target residual = y - problem.evaluate_f(x);
  Point next = x + h * problem.apply_l(x, residual);
  const double next_norm = problem.norm_x(next);
  if (!(next_norm < problem.radius)) {
    std::ostringstream msg;
    msg << "descent_step: |x| = " << next_norm << " leaves the ball of radius "
        << problem.radius;
    fail(Errc::radius_breach, msg.str());
  }
  return next;
}

namespace detail {

template <class Point, class Target>
SolveResult<Point> run_flow(const LocalProblem<Point, Target>& problem, const Target& y,
                            const DescentConfig& cfg, const Point& start) {
  SolveResult<Point> out;
  out.x = start;
  out.start = start;
  out.tau = cfg.tau;
  out.tol = cfg.tol;

  Target residual = y - problem.evaluate_f(start);
  double r = problem.norm_y(residual);
  out.target_distance = r;
  out.residuals.push_back(r);
  out.times.push_back(0.0);
  out.x_norms.push_back(problem.norm_x(start));

  const double threshold = std::max(cfg.tol * r, cfg.abs_tol);
  if (r <= threshold) {
    out.converged = true;
    out.status = SolveStatus::converged;
    return out;
  }

  const double min_step = cfg.step * std::ldexp(1.0, -40);
  double h = cfg.step;
  Point x = start;
  Point direction = problem.apply_l(x, residual);
  while (out.attempts < cfg.max_steps) {
    ++out.attempts;
    Point candidate = x + h * direction;
    const double cand_norm = problem.norm_x(candidate);
    bool accept = std::isfinite(cand_norm) && cand_norm < problem.radius;
    Target cand_residual;
    double cand_r = 0.0;
    if (accept) {
      cand_residual = y - problem.evaluate_f(candidate);
      cand_r = problem.norm_y(cand_residual);
      const double required = (1.0 - 0.5 * (1.0 - cfg.a_prime) * h) * r;
      accept = std::isfinite(cand_r) && (!cfg.line_search || cand_r <= required);
    }
    if (!accept) {
      ++out.rejected;
      const bool breach = !(std::isfinite(cand_norm) && cand_norm < problem.radius);
      h *= 0.5;
      if (h < min_step) {
        out.status = breach ? SolveStatus::radius_breach : SolveStatus::stalled;
        break;
      }
      continue;
    }

    x = std::move(candidate);
    residual = std::move(cand_residual);
    r = cand_r;
    out.flow_time += h;
    out.residuals.push_back(r);
    out.times.push_back(out.flow_time);
    out.x_norms.push_back(cand_norm);
    if (r <= threshold) {
      out.converged = true;
      out.status = SolveStatus::converged;
      break;
    }
    h = cfg.step;
    direction = problem.apply_l(x, residual);
  }
  out.x = std::move(x);
  return out;
}

}  // namespace detail

/// Solves f(x) = y starting from 0 (or from a warm start inside the ball).
/// Targets outside the admissible radius are rejected with Errc::out_of_radius.
template <class Point, class Target>
SolveResult<Point> solve_local(const LocalProblem<Point, Target>& problem, const Target& y,
                               const DescentConfig& cfg,
                               const std::optional<Point>& warm_start = std::nullopt) {
  cfg.validate(problem.a);
  const Point start = warm_start.value_or(problem.origin);
  const double start_norm = problem.norm_x(start);
  if (!(start_norm < problem.radius)) {
    fail(Errc::out_of_radius, "solve_local: warm start outside the ball");
  }
  const double distance = problem.norm_y(y - problem.evaluate_f(start));
  const double admissible = problem.local_radius(start_norm);
  if (!(distance < admissible)) {
    std::ostringstream msg;
    msg << "solve_local: target distance " << distance
        << " is not below the admissible radius " << admissible;
    fail(Errc::out_of_radius, msg.str());
  }

  SolveResult<Point> out = detail::run_flow(problem, y, cfg, start);
  const double moved = problem.norm_x(out.x - start);
  out.bound_ok = moved <= problem.guaranteed_factor() * distance * (1.0 + 1e-9);
  return out;
}

/// Neumann-series right-inverse L(x) sum_{j < terms} P^j k with P = I - Df(x) L(x).
template <class Point, class Target>
Point neumann_right_inverse(const LocalProblem<Point, Target>& problem, const Point& x,
                            const Target& k, int terms) {
  if (terms < 1) fail(Errc::domain, "neumann_right_inverse: terms must be >= 1");
  Target sum = k;
  Target term = k;
  for (int j = 1; j < terms; ++j) {
    Target image = problem.apply_df(x, problem.apply_l(x, term));
    term = term - image;
    sum = sum + term;
  }
  return problem.apply_l(x, sum);
}

/// residual(t) <= (1 - (1 - a') t) residual(0) + 10 tol for every record with t <= min(tau, 1/2).
template <class Point>
bool residual_decay_check(const SolveResult<Point>& trace, double a_prime) {
  if (trace.residuals.empty()) return true;
  const double horizon = std::min(trace.tau, 0.5);
  const double r0 = trace.residuals.front();
  for (std::size_t i = 0; i < trace.residuals.size(); ++i) {
    const double t = trace.times[i];
    if (t > horizon) break;
    const double bound = (1.0 - (1.0 - a_prime) * t) * r0 + 10.0 * trace.tol;
    if (!(trace.residuals[i] <= bound)) return false;
  }
  return true;
}

template <class Point>
bool residual_nonincreasing(const SolveResult<Point>& trace) {
  return std::is_sorted(trace.residuals.rbegin(), trace.residuals.rend());
}

struct AssumptionReport {
  double f_at_origin = 0.0;   // |f(0)|
  double sup_l_ratio = 0.0;   // max |L(x) w| / |w|
  double max_defect = 0.0;    // max |(Df(x') L(x) - I) w| / |w|
  std::size_t samples = 0;

  bool consistent_with(double m, double a) const noexcept {
    return f_at_origin == 0.0 && sup_l_ratio < m && max_defect <= a;
  }
};

/// Falsification probe for the local assumptions: f(0) = 0, sup |L| < m and
/// |(Df(x') L(x) - I) w| <= a |w| for x' near x.  The neighbours x' are
/// x + step * (x_j - x) for the other sample points x_j.
template <class Point, class Target>
AssumptionReport sample_assumptions(const LocalProblem<Point, Target>& problem,
                                    std::span<const Point> points,
                                    std::span<const Target> directions,
                                    double neighbour_step = 1e-3) {
  AssumptionReport report;
  report.f_at_origin = problem.norm_y(problem.evaluate_f(problem.origin));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point& x = points[i];
    for (const Target& w : directions) {
      const double wn = problem.norm_y(w);
      if (wn == 0.0) continue;
      const Point lw = problem.apply_l(x, w);
      report.sup_l_ratio = std::max(report.sup_l_ratio, problem.norm_x(lw) / wn);
      const Point& other = points[(i + 1) % points.size()];
      for (const Point& xp : {x, Point(x + neighbour_step * (other - x))}) {
        const Target defect = problem.apply_df(xp, lw) - w;
        report.max_defect = std::max(report.max_defect, problem.norm_y(defect) / wn);
      }
      ++report.samples;
    }
  }
  return report;
}

/// CSV rows: step, flow time, residual, |x|.
template <class Point>
void write_trace_csv(std::ostream& out, const SolveResult<Point>& trace) {
  const auto old_precision = out.precision(17);
  out << "step,time,residual,x_norm\n";
  for (std::size_t i = 0; i < trace.residuals.size(); ++i) {
    out << i << ',' << trace.times[i] << ',' << trace.residuals[i] << ','
        << trace.x_norms[i] << '\n';
  }
  out.precision(old_precision);
}

}  // namespace rinv
