#pragma once

// Continuous selection y -> g(y) sampled along paths of targets.  Each sample
// is solved from the previous solution as warm start, which keeps the tracker
// on the branch through g(0) = 0.  The root census is an independent all-roots
// oracle (companion matrix + Newton polish) used to show that solutions of
// Example A are not unique once the ball is large enough.

#include <rinv/error.hpp>
#include <rinv/local_solver.hpp>
#include <rinv/problems/example_a.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

namespace rinv {

template <class Target>
struct PathSpec {
  std::vector<Target> samples;         // samples[0] must be the zero target
  std::optional<std::size_t> closes_at;  // samples.back() revisits samples[*closes_at]
};

template <class Point>
struct BranchResult {
  std::vector<Point> points;
  std::vector<double> gaps;       // |y_{i+1} - y_i|
  std::vector<double> modulus;    // |g(y_{i+1}) - g(y_i)|
  std::vector<double> residuals;  // |f(g(y_i)) - y_i|
  double residual_max = 0.0;
  double closure_gap = 0.0;
  bool lipschitz_ok = true;  // modulus <= m / (1 - a) gap (1 + 1e-6) on every segment
};

/// Fraction of the theoretical local radius a path segment may use.
inline constexpr double kAdmissibilityMargin = 0.9;

template <class Point, class Target>
BranchResult<Point> track_path(const LocalProblem<Point, Target>& problem,
                               const PathSpec<Target>& path, const DescentConfig& cfg) {
  if (path.samples.empty()) fail(Errc::config, "track_path: empty path");
  if (problem.norm_y(path.samples.front()) != 0.0) {
    fail(Errc::config, "track_path: the first sample must be the zero target");
  }
  BranchResult<Point> out;
  out.points.push_back(problem.origin);
  out.residuals.push_back(0.0);
  const double factor = problem.guaranteed_factor();

  for (std::size_t i = 1; i < path.samples.size(); ++i) {
    const Point& previous = out.points.back();
    const Target& y = path.samples[i];
    const double previous_norm = problem.norm_x(previous);
    const double distance = problem.norm_y(y - problem.evaluate_f(previous));
    const double allowed = kAdmissibilityMargin * problem.local_radius(previous_norm);
    if (!(distance < allowed)) {
      std::ostringstream msg;
      msg << "track_path: segment " << i - 1 << " -> " << i << " has length " << distance
          << " but the local radius allows " << allowed << "; refine the path";
      fail(Errc::path_refinement, msg.str());
    }
    auto solved = solve_local(problem, y, cfg, std::optional<Point>(previous));
    if (!solved.converged) {
      std::ostringstream msg;
      msg << "track_path: sample " << i << " did not converge (" << to_string(solved.status)
          << ")";
      fail(Errc::non_convergence, msg.str());
    }
    const double gap = problem.norm_y(y - path.samples[i - 1]);
    const double modulus = problem.norm_x(solved.x - previous);
    out.gaps.push_back(gap);
    out.modulus.push_back(modulus);
    if (!(modulus <= factor * gap * (1.0 + 1e-6))) out.lipschitz_ok = false;
    const double residual = problem.norm_y(problem.evaluate_f(solved.x) - y);
    out.residuals.push_back(residual);
    out.residual_max = std::max(out.residual_max, residual);
    out.points.push_back(std::move(solved.x));
  }
  if (path.closes_at) {
    out.closure_gap = problem.norm_x(out.points.back() - out.points.at(*path.closes_at));
  }
  return out;
}

/// Straight path 0 -> endpoint in `steps` equal segments.
template <class Target>
PathSpec<Target> straight_path(const Target& zero, const Target& endpoint, int steps) {
  if (steps < 1) fail(Errc::config, "straight_path: steps must be >= 1");
  PathSpec<Target> path;
  for (int i = 0; i <= steps; ++i) {
    path.samples.push_back(Target(zero + (static_cast<double>(i) / steps) * endpoint));
  }
  return path;
}

/// 0 -> radius along the real axis in `radial_steps`, then once around the
/// circle |Z| = radius with `samples` segments, closing where the loop began.
inline PathSpec<std::complex<double>> circle_path(double radius, int samples, int radial_steps) {
  if (samples < 3 || radial_steps < 1) fail(Errc::config, "circle_path: too few samples");
  PathSpec<std::complex<double>> path;
  for (int i = 0; i <= radial_steps; ++i) {
    path.samples.emplace_back(radius * static_cast<double>(i) / radial_steps, 0.0);
  }
  path.closes_at = path.samples.size() - 1;
  for (int j = 1; j <= samples; ++j) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / samples;
    path.samples.push_back(j == samples ? std::complex<double>(radius, 0.0)
                                        : std::polar(radius, theta));
  }
  return path;
}

/// Insert the midpoint of every segment.
template <class Target>
PathSpec<Target> refine_path(const PathSpec<Target>& path) {
  PathSpec<Target> out;
  for (std::size_t i = 0; i < path.samples.size(); ++i) {
    if (i > 0) out.samples.push_back(Target(0.5 * (path.samples[i - 1] + path.samples[i])));
    if (path.closes_at && *path.closes_at == i) out.closes_at = out.samples.size();
    out.samples.push_back(path.samples[i]);
  }
  return out;
}

/// CSV rows: index, Re/Im of y_i, Re/Im of g(y_i), segment modulus, residual.
inline void write_branch_csv(std::ostream& out, const PathSpec<std::complex<double>>& path,
                             const BranchResult<std::complex<double>>& branch) {
  const auto old_precision = out.precision(17);
  out << "index,y_re,y_im,g_re,g_im,modulus,residual\n";
  for (std::size_t i = 0; i < branch.points.size(); ++i) {
    const double modulus = i == 0 ? 0.0 : branch.modulus[i - 1];
    out << i << ',' << path.samples[i].real() << ',' << path.samples[i].imag() << ','
        << branch.points[i].real() << ',' << branch.points[i].imag() << ',' << modulus << ','
        << branch.residuals[i] << '\n';
  }
  out.precision(old_precision);
}

enum class ProbeOutcome { unique, distinct, indeterminate };

inline const char* to_string(ProbeOutcome outcome) noexcept {
  switch (outcome) {
    case ProbeOutcome::unique: return "unique";
    case ProbeOutcome::distinct: return "distinct";
    case ProbeOutcome::indeterminate: return "indeterminate";
  }
  return "unknown";
}

template <class Point>
struct ProbeResult {
  ProbeOutcome outcome = ProbeOutcome::indeterminate;
  std::vector<Point> limits;
  double max_spread = 0.0;
};

/// Runs the descent flow for y from every start (without the warm-start
/// radius gate) and compares the limits.  Agreement within 10 tol means
/// unique; any non-converged run makes the probe indeterminate.
template <class Point, class Target>
ProbeResult<Point> uniqueness_probe(const LocalProblem<Point, Target>& problem, const Target& y,
                                    const std::vector<Point>& starts, const DescentConfig& cfg) {
  cfg.validate(problem.a);
  if (starts.empty()) fail(Errc::config, "uniqueness_probe: no starts");
  ProbeResult<Point> out;
  for (const Point& start : starts) {
    if (!(problem.norm_x(start) < problem.radius)) {
      fail(Errc::out_of_radius, "uniqueness_probe: start outside the ball");
    }
    auto run = detail::run_flow(problem, y, cfg, start);
    if (!run.converged) {
      out.outcome = ProbeOutcome::indeterminate;
      return out;
    }
    out.limits.push_back(std::move(run.x));
  }
  for (std::size_t i = 1; i < out.limits.size(); ++i) {
    out.max_spread = std::max(out.max_spread, problem.norm_x(out.limits[i] - out.limits[0]));
  }
  out.outcome = out.max_spread <= 10.0 * cfg.tol ? ProbeOutcome::unique : ProbeOutcome::distinct;
  return out;
}

/// All roots of sum_j coeffs[j] w^j (coeffs.back() != 0) as eigenvalues of the
/// companion matrix.  The variable is first rescaled by |c_0 / c_n|^{1/n} so
/// the companion entries are of unit size.
inline std::vector<std::complex<double>> polynomial_roots(
    const std::vector<std::complex<double>>& coeffs) {
  if (coeffs.size() < 2 || coeffs.back() == std::complex<double>{}) {
    fail(Errc::domain, "polynomial_roots: need degree >= 1 with nonzero leading coefficient");
  }
  const int degree = static_cast<int>(coeffs.size()) - 1;
  double scale = 1.0;
  if (coeffs.front() != std::complex<double>{}) {
    scale = std::pow(std::abs(coeffs.front() / coeffs.back()), 1.0 / degree);
  }
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(degree, degree);
  for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  for (int j = 0; j < degree; ++j) {
    // Monic polynomial in v = w / scale: coefficient of v^j is c_j scale^{j - n} / c_n.
    companion(j, degree - 1) = -coeffs[j] * std::pow(scale, j - degree) / coeffs.back();
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
  if (solver.info() != Eigen::Success) {
    fail(Errc::oracle_failure, "polynomial_roots: eigenvalue iteration failed");
  }
  std::vector<std::complex<double>> roots;
  roots.reserve(degree);
  for (int i = 0; i < degree; ++i) roots.push_back(scale * solver.eigenvalues()(i));
  return roots;
}

namespace example_a {

/// All n solutions of (2 + z)^n - 2^n = Z, deduplicated at 1e-9.  The roots
/// are found in the shifted variable w = 2 + z, where the equation reads
/// w^n = 2^n + Z, then Newton-polished in that variable.
inline std::vector<std::complex<double>> all_roots(int n, std::complex<double> target) {
  check_degree(n);
  const std::complex<double> constant = std::ldexp(1.0, n) + target;
  std::vector<std::complex<double>> coeffs(static_cast<std::size_t>(n) + 1);
  coeffs.front() = -constant;
  coeffs.back() = 1.0;
  std::vector<std::complex<double>> roots;
  for (auto w : polynomial_roots(coeffs)) {
    for (int iter = 0; iter < 3; ++iter) {
      const auto value = std::pow(w, n) - constant;
      const auto slope = static_cast<double>(n) * std::pow(w, n - 1);
      if (slope == std::complex<double>{}) break;
      w -= value / slope;
    }
    const std::complex<double> z = w - 2.0;
    const bool duplicate = std::any_of(roots.begin(), roots.end(), [&](const auto& r) {
      return std::abs(r - z) <= 1e-9;
    });
    if (!duplicate) roots.push_back(z);
  }
  if (roots.size() != static_cast<std::size_t>(n)) {
    fail(Errc::oracle_failure, "root census: roots collapsed under deduplication");
  }
  return roots;
}

/// Number of solutions of (2 + z)^n - 2^n = Z with |z| <= radius.
inline int root_census(int n, std::complex<double> target, double radius) {
  if (!(radius > 0.0)) fail(Errc::domain, "root_census: radius must be positive");
  const auto roots = all_roots(n, target);
  return static_cast<int>(std::count_if(roots.begin(), roots.end(),
                                        [radius](const auto& z) { return std::abs(z) <= radius; }));
}

}  // namespace example_a

}  // namespace rinv
