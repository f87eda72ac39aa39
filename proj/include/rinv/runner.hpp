#pragma once

// Executes one RunConfig: builds the problem, runs the requested command,
// writes its CSV artifacts into cfg.output and prints a one-line summary.
// Errors surface as rinv::Error; map them with exit_code().

#include <rinv/branch.hpp>
#include <rinv/config.hpp>
#include <rinv/error.hpp>
#include <rinv/local_solver.hpp>
#include <rinv/nash_moser.hpp>
#include <rinv/problems/example_a.hpp>
#include <rinv/problems/nemytskii.hpp>
#include <rinv/problems/synthetic.hpp>
#include <rinv/scale.hpp>
#include <rinv/tame.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace rinv {

namespace runner_detail {

inline std::ofstream open_artifact(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.output);
  const auto path = std::filesystem::path(cfg.output) / name;
  std::ofstream out(path);
  if (!out) fail(Errc::config, "cannot write artifact '" + path.string() + "'");
  return out;
}

inline std::string format_complex(Complex z) {
  std::ostringstream s;
  s.precision(10);
  s << z.real() << (z.imag() < 0.0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return s.str();
}

/// Copies the user-facing solver fields onto the contract-derived defaults.
inline DescentConfig descent_for(const RunConfig& cfg, double a, double m, double sup_l) {
  DescentConfig d = make_descent_config(a, m, sup_l, cfg.solver.step);
  d.tol = cfg.solver.tol;
  d.abs_tol = cfg.solver.abs_tol;
  d.max_steps = cfg.solver.max_steps;
  d.line_search = cfg.solver.line_search;
  return d;
}

inline LocalProblem<Complex> example_a_problem(const ProblemConfig& p) {
  return example_a::make_problem(p.n, p.m.value_or(2.0 / p.n), p.a);
}

inline SyntheticLossProblem synthetic_problem(const ProblemConfig& p, double s_max, long k_max) {
  SyntheticLossProblem::Options opts;
  opts.ell_prime = p.ell_prime;
  opts.eps = p.eps;
  opts.neumann_terms = p.neumann_terms;
  return SyntheticLossProblem(ScaleSpec(s_max, k_max), opts);
}

inline void require_kind(const RunConfig& cfg, std::initializer_list<ProblemKind> kinds) {
  if (std::find(kinds.begin(), kinds.end(), cfg.problem.kind) == kinds.end()) {
    fail(Errc::config, std::string("config field 'problem.kind': ") + to_string(cfg.problem.kind) +
                           " is not supported by " + to_string(cfg.command));
  }
}

inline ScaleVector manufactured_solution(const TargetConfig& t, const ScaleSpec& spec) {
  ScaleVector u(spec);
  for (const auto& [k, value] : t.solution) {
    if (!spec.contains(k)) fail(Errc::config, "config field 'target.solution': mode out of range");
    u[k] += value;
  }
  return u;
}

inline void run_solve(const RunConfig& cfg, std::ostream& log) {
  require_kind(cfg, {ProblemKind::example_a, ProblemKind::nemytskii});
  if (cfg.problem.kind == ProblemKind::example_a) {
    const auto problem = example_a_problem(cfg.problem);
    const auto d = descent_for(cfg, problem.a, problem.m, example_a::sup_right_inverse(cfg.problem.n));
    const auto result = solve_local(problem, cfg.target.value, d);
    auto trace = open_artifact(cfg, "trace.csv");
    write_trace_csv(trace, result);
    const double residual = std::abs(example_a::polynomial(cfg.problem.n, result.x) - cfg.target.value);
    log << "solve example_a n=" << cfg.problem.n << ": " << to_string(result.status)
        << " x = " << format_complex(result.x) << " residual = " << residual
        << " steps = " << result.accepted_steps()
        << " bound_ok = " << (result.bound_ok ? "true" : "false") << '\n';
    if (!result.converged) fail(Errc::non_convergence, "solve: descent did not converge");
    return;
  }

  const auto phi = nemytskii::sine_perturbed(cfg.problem.amplitude,
                                             static_cast<std::size_t>(cfg.problem.grid_size));
  const double m = cfg.problem.m.value_or(4.0);
  const auto problem = nemytskii::make_problem(phi, cfg.problem.radius, m, cfg.problem.a);
  std::mt19937_64 rng(cfg.seed);
  const auto v = nemytskii::random_field(phi.grid_size, rng, cfg.target.modes, cfg.target.sup);
  const auto d = descent_for(cfg, problem.a, problem.m, 1.0 / phi.inf_phi_prime);
  const auto result = solve_local(problem, v, d);
  const auto oracle = nemytskii::exact_inverse(phi, v);
  auto trace = open_artifact(cfg, "trace.csv");
  write_trace_csv(trace, result);
  auto solution = open_artifact(cfg, "solution.csv");
  solution.precision(17);
  solution << "j,v,x,oracle\n";
  for (std::size_t j = 0; j < v.size(); ++j) {
    solution << j << ',' << v[j] << ',' << result.x[j] << ',' << oracle[j] << '\n';
  }
  const nemytskii::GridFunction gap = result.x - oracle;
  const double deviation = nemytskii::sup_norm(gap);
  log << "solve nemytskii N=" << phi.grid_size << ": " << to_string(result.status)
      << " max_oracle_deviation = " << deviation << " residual = " << result.residuals.back()
      << " steps = " << result.accepted_steps() << '\n';
  if (!result.converged) fail(Errc::non_convergence, "solve: descent did not converge");
}

inline void run_branch(const RunConfig& cfg, std::ostream& log) {
  require_kind(cfg, {ProblemKind::example_a});
  const auto problem = example_a_problem(cfg.problem);
  const auto d = descent_for(cfg, problem.a, problem.m, example_a::sup_right_inverse(cfg.problem.n));
  const auto path = cfg.path.shape == "circle"
                        ? circle_path(cfg.path.radius, cfg.path.samples, cfg.path.radial_steps)
                        : straight_path(Complex{}, cfg.path.endpoint, cfg.path.steps);
  const auto branch = track_path(problem, path, d);
  auto csv = open_artifact(cfg, "branch.csv");
  write_branch_csv(csv, path, branch);
  const Complex end = branch.points.back();
  log << "branch example_a n=" << cfg.problem.n << ": samples = " << branch.points.size()
      << " closure_gap = " << branch.closure_gap << " residual_max = " << branch.residual_max
      << " lipschitz_ok = " << (branch.lipschitz_ok ? "true" : "false")
      << " g_end = " << format_complex(end);
  const Complex y_end = path.samples.back();
  try {
    log << " closed_form_deviation = "
        << std::abs(end - example_a::closed_inverse(cfg.problem.n, y_end));
  } catch (const Error&) {
  }
  log << '\n';
}

inline void run_census(const RunConfig& cfg, std::ostream& log) {
  require_kind(cfg, {ProblemKind::example_a});
  const int n = cfg.problem.n;
  auto roots = example_a::all_roots(n, cfg.target.value);
  std::sort(roots.begin(), roots.end(), [](const Complex& x, const Complex& y) {
    const double ax = std::abs(x), ay = std::abs(y);
    return ax != ay ? ax < ay : std::arg(x) < std::arg(y);
  });
  auto csv = open_artifact(cfg, "roots.csv");
  csv.precision(17);
  csv << "index,re,im,abs,in_disc\n";
  int inside = 0;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const bool in_disc = std::abs(roots[i]) <= cfg.census_radius;
    inside += in_disc ? 1 : 0;
    csv << i << ',' << roots[i].real() << ',' << roots[i].imag() << ',' << std::abs(roots[i])
        << ',' << (in_disc ? 1 : 0) << '\n';
  }
  log << "roots_in_disc = " << inside << '\n';
}

inline void run_verify_tame(const RunConfig& cfg, std::ostream& log) {
  std::mt19937_64 rng(cfg.seed);
  const ScaleSpec spec(cfg.sweep.s_max, cfg.sweep.k_max);
  auto csv = open_artifact(cfg, "sweep.csv");
  csv.precision(17);
  csv << "metric,value,bound\n";
  if (cfg.sweep.kind == "projectors") {
    const auto sweep = projector_sweep(spec, cfg.sweep.trials, rng);
    csv << "worst_loss_ratio," << sweep.worst_loss << ",1\n";
    csv << "worst_gain_ratio," << sweep.worst_gain << ",1\n";
    csv << "nesting_failures," << sweep.nesting_failures << ",0\n";
    log.precision(17);
    log << "worst_loss_ratio = " << sweep.worst_loss << " worst_gain_ratio = " << sweep.worst_gain
        << " nesting_failures = " << sweep.nesting_failures << " samples = " << sweep.samples
        << '\n';
    return;
  }
  require_kind(cfg, {ProblemKind::synthetic});
  const auto problem = synthetic_problem(cfg.problem, spec.s_max, spec.k_max);
  const auto c = problem.constants();
  const double direct = verify_tame_direct(problem, cfg.sweep.trials, rng);
  const double inverse = verify_tame_inverse(problem, cfg.sweep.trials, rng);
  const double right = right_inverse_defect(problem, cfg.sweep.trials, rng);
  const double left = left_inverse_defect(problem, cfg.sweep.trials, rng);
  csv << "tame_direct," << direct << ',' << c.a_direct << '\n';
  csv << "tame_inverse," << inverse << ',' << c.b_inverse << '\n';
  csv << "right_inverse_defect," << right << ",1e-09\n";
  csv << "left_inverse_defect," << left << ",1e-09\n";
  const bool ok = direct <= c.a_direct && inverse <= c.b_inverse && right <= 1e-9;
  log << "tame_direct = " << direct << " (a = " << c.a_direct << ") tame_inverse = " << inverse
      << " (b = " << c.b_inverse << ") right_inverse_defect = " << right
      << " left_inverse_defect = " << left << " certified = " << (ok ? "true" : "false") << '\n';
}

inline void run_nashmoser(const RunConfig& cfg, std::ostream& log) {
  require_kind(cfg, {ProblemKind::synthetic});
  const auto problem = synthetic_problem(cfg.problem, cfg.problem.s_max, cfg.problem.k_max);
  const ScaleVector u_star = manufactured_solution(cfg.target, problem.spec());
  const ScaleVector v = problem.apply(u_star, cfg.target.oversample);
  const auto result = run(problem, v, cfg.nash_moser);
  auto csv = open_artifact(cfg, "levels.csv");
  write_levels_csv(csv, result);
  auto records = open_artifact(cfg, "solution.txt");
  write_records(records, result.g);

  std::vector<double> increments;
  double worst_identity = 0.0;
  for (const auto& level : result.levels) {
    increments.push_back(level.z_norm_s1);
    worst_identity = std::max(worst_identity, level.identity_residual);
  }
  if (!result.converged) {
    log << "nashmoser: failed at level " << result.failed_level.value_or(0) << " after "
        << result.levels.size() << " levels: " << result.failure << '\n';
    fail(result.failure_code, result.failure);
  }
  log << "nashmoser: converged levels = " << result.levels.size()
      << " error_s1 = " << norm(result.g - u_star, cfg.nash_moser.s1)
      << " max_identity_residual = " << worst_identity
      << " increment_ratio = " << fit_geometric_ratio(increments)
      << " g_norm_s1 = " << norm(result.g, cfg.nash_moser.s1)
      << " v_norm_delta = " << result.v_norm_delta
      << " bound_ok = " << (result.bound_ok ? "true" : "false") << '\n';
}

/// Left-inverse defect and modulus ladder of the synthetic map on a coarse
/// scale, used as the sampled hypothesis check before comparing schedules.
template <class Rng>
UniquenessCertificate synthetic_certificate(const ProblemConfig& p, Rng& rng) {
  const auto coarse = synthetic_problem(p, 8.0, 32);
  UniquenessCertificate cert;
  cert.left_inverse_defect = left_inverse_defect(coarse, 100, rng);
  const double s0 = coarse.constants().s0;
  const ScaleVector u = random_scale_vector(coarse.spec(), rng, 8, 2.0, s0, 0.05);
  const ScaleVector h = random_scale_vector(coarse.spec(), rng, 8, 2.0, s0, 0.05);
  std::vector<double> factors;
  for (int j = 1; j <= 8; ++j) factors.push_back(std::ldexp(1.0, -j));
  const auto ladder = modulus_ladder(coarse, u, h, s0, factors);
  cert.modulus_decreasing = true;
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    if (!(ladder[i] < ladder[i - 1])) cert.modulus_decreasing = false;
  }
  return cert;
}

/// v_0 = 0 and v_i = F(w_i) for small random w_i on the lowest modes.
template <class Rng>
std::vector<ScaleVector> uniqueness_grid(const SyntheticLossProblem& problem,
                                         const UniquenessConfig& u, double s1, Rng& rng) {
  std::vector<ScaleVector> grid{ScaleVector(problem.spec())};
  for (int i = 1; i < u.grid; ++i) {
    const double size = u.amplitude * static_cast<double>(i) / std::max(u.grid - 1, 1);
    const ScaleVector w = random_scale_vector(problem.spec(), rng, u.active_modes, 1.0, s1, size);
    grid.push_back(problem.apply(w, 4.0));
  }
  return grid;
}

inline void run_uniqueness(const RunConfig& cfg, std::ostream& log) {
  require_kind(cfg, {ProblemKind::synthetic});
  const auto problem = synthetic_problem(cfg.problem, cfg.problem.s_max, cfg.problem.k_max);
  std::mt19937_64 rng(cfg.seed);
  const auto cert = synthetic_certificate(cfg.problem, rng);
  const auto grid = uniqueness_grid(problem, cfg.uniqueness, cfg.nash_moser.s1, rng);
  NashMoserConfig b = cfg.nash_moser;
  b.sigma = cfg.uniqueness.sigma_b;
  b.levels = cfg.uniqueness.levels_b;
  const auto report = uniqueness_suite(problem, grid, cfg.nash_moser, b, cert);
  auto csv = open_artifact(cfg, "uniqueness.csv");
  csv.precision(17);
  csv << "index,v_norm_delta,deviation\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    csv << i << ',' << norm(grid[i], cfg.nash_moser.delta) << ',' << report.deviations[i] << '\n';
  }
  log << "max_deviation = " << report.max_deviation << " excluded = " << report.excluded.size()
      << " left_inverse_defect = " << cert.left_inverse_defect
      << " modulus_decreasing = " << (cert.modulus_decreasing ? "true" : "false") << '\n';
}

}  // namespace runner_detail

/// Runs the configured command; throws rinv::Error on failure.
inline void run_command(const RunConfig& cfg, std::ostream& log) {
  switch (cfg.command) {
    case Command::solve: return runner_detail::run_solve(cfg, log);
    case Command::branch: return runner_detail::run_branch(cfg, log);
    case Command::census: return runner_detail::run_census(cfg, log);
    case Command::verify_tame: return runner_detail::run_verify_tame(cfg, log);
    case Command::nashmoser: return runner_detail::run_nashmoser(cfg, log);
    case Command::uniqueness: return runner_detail::run_uniqueness(cfg, log);
  }
}

}  // namespace rinv
