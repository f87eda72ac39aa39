// Acceptance checks.  Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.  `acceptance N` runs criterion N alone.

#include <rinv/branch.hpp>
#include <rinv/local_solver.hpp>
#include <rinv/nash_moser.hpp>
#include <rinv/problems/example_a.hpp>
#include <rinv/problems/nemytskii.hpp>
#include <rinv/problems/synthetic.hpp>
#include <rinv/scale.hpp>
#include <rinv/tame.hpp>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using rinv::Complex;
using rinv::ScaleSpec;
using rinv::ScaleVector;
using Clock = std::chrono::steady_clock;
namespace nem = rinv::nemytskii;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
  Outcome out;
  try {
    out = check();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  if (!out.pass) ++failures;
  std::printf("%s criterion %d: %s (%s)\n", out.pass ? "PASS" : "FAIL", id, name.c_str(),
              out.detail.c_str());
  std::fflush(stdout);
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Criteria 1-3 share one batch of Example A solves.
struct ExampleABatch {
  int n = 0;
  double a_prime = 0.0;
  std::vector<Complex> targets;
  std::vector<rinv::SolveResult<Complex>> traces;
};

std::vector<ExampleABatch> example_a_batches;
double example_a_seconds = 0.0;

void solve_example_a_batches() {
  const auto start = Clock::now();
  std::mt19937_64 rng(20240501);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int n : {2, 8}) {
    const auto problem = rinv::example_a::make_problem(n);  // m = 2/n, a = 1/2
    const auto cfg = rinv::make_descent_config(problem.a, problem.m,
                                               rinv::example_a::sup_right_inverse(n));
    ExampleABatch batch;
    batch.n = n;
    batch.a_prime = cfg.a_prime;
    const double bound = 0.5 * n * (1.0 - 1e-3);
    for (int i = 0; i < 50; ++i) {
      const Complex y = std::polar(bound * std::sqrt(unit(rng)), 2.0 * std::numbers::pi * unit(rng));
      batch.targets.push_back(y);
      batch.traces.push_back(rinv::solve_local(problem, y, cfg));
    }
    example_a_batches.push_back(std::move(batch));
  }
  example_a_seconds = seconds_since(start);
}

Outcome criterion_closed_form() {
  double worst_residual = 0.0, worst_gap = 0.0;
  bool all_converged = true;
  for (const auto& batch : example_a_batches) {
    for (std::size_t i = 0; i < batch.targets.size(); ++i) {
      const auto& r = batch.traces[i];
      all_converged = all_converged && r.converged;
      worst_residual = std::max(
          worst_residual, std::abs(rinv::example_a::polynomial(batch.n, r.x) - batch.targets[i]));
      worst_gap = std::max(
          worst_gap, std::abs(r.x - rinv::example_a::closed_inverse(batch.n, batch.targets[i])));
    }
  }
  std::ostringstream d;
  d << "100 solves, max |f(x)-Z| = " << worst_residual << ", max |x-g(Z)| = " << worst_gap
    << ", " << example_a_seconds << " s";
  return {all_converged && worst_residual <= 1e-10 && worst_gap <= 1e-8 && example_a_seconds <= 5.0,
          d.str()};
}

Outcome criterion_norm_bound() {
  double worst = 0.0;
  bool ok = true;
  for (const auto& batch : example_a_batches) {
    const double factor = (2.0 / batch.n) / (1.0 - 0.5);
    for (std::size_t i = 0; i < batch.targets.size(); ++i) {
      const auto& r = batch.traces[i];
      if (!r.converged) continue;
      const double ratio = std::abs(r.x) / (factor * std::abs(batch.targets[i]));
      worst = std::max(worst, ratio);
      ok = ok && std::abs(r.x) <= factor * std::abs(batch.targets[i]) * (1.0 + 1e-9);
    }
  }
  std::ostringstream d;
  d << "max |x| / (m/(1-a) |Z|) = " << worst;
  return {ok, d.str()};
}

Outcome criterion_decay() {
  std::size_t checked = 0, violations = 0;
  for (const auto& batch : example_a_batches) {
    for (const auto& trace : batch.traces) {
      ++checked;
      if (!rinv::residual_decay_check(trace, batch.a_prime)) ++violations;
    }
  }
  std::ostringstream d;
  d << checked << " traces, " << violations << " violations";
  return {violations == 0 && checked == 100, d.str()};
}

Outcome criterion_closure() {
  const int n = 16;
  const auto problem = rinv::example_a::make_problem(n);
  const auto cfg = rinv::make_descent_config(problem.a, problem.m,
                                             rinv::example_a::sup_right_inverse(n));
  const auto path = rinv::circle_path(0.5, 256, 16);
  const auto branch = rinv::track_path(problem, path, cfg);
  const double factor = problem.guaranteed_factor();
  double worst = 0.0;
  for (std::size_t i = 0; i < branch.gaps.size(); ++i) {
    worst = std::max(worst, branch.modulus[i] / (factor * branch.gaps[i]));
  }
  std::ostringstream d;
  d << "closure_gap = " << branch.closure_gap << ", max modulus / (m/(1-a) gap) = " << worst;
  return {branch.closure_gap <= 1e-8 && branch.lipschitz_ok, d.str()};
}

Outcome criterion_census() {
  const int n = 64;
  const Complex target(0.0, 13.0);
  const int count = rinv::example_a::root_census(n, target, 13.0 / 64.0);
  const auto problem = rinv::example_a::make_problem(n);
  const auto cfg = rinv::make_descent_config(problem.a, problem.m,
                                             rinv::example_a::sup_right_inverse(n));
  const auto branch =
      rinv::track_path(problem, rinv::straight_path(Complex{}, target, 8), cfg);
  const double gap = std::abs(branch.points.back() - rinv::example_a::closed_inverse(n, target));
  std::ostringstream d;
  d << "roots_in_disc = " << count << ", |track - g(Z)| = " << gap;
  return {count == 3 && gap <= 1e-6, d.str()};
}

Outcome criterion_scale_axioms() {
  const ScaleSpec spec(8.0, 32);
  std::mt19937_64 rng(7);
  const auto sweep = rinv::projector_sweep(spec, 10000, rng);
  std::uniform_real_distribution<double> cut(1.0, 1.5 * spec.max_weight());
  const rinv::ProjectorFamily family{spec};
  std::size_t nesting_failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto u = rinv::random_scale_vector(spec, rng, 32, 1.0, 0.0, 1.0);
    const double a = cut(rng), b = cut(rng);
    if (!(family(family(u, a), b) == family(u, std::min(a, b)))) ++nesting_failures;
  }
  std::ostringstream d;
  d.precision(17);
  d << "worst_loss = " << sweep.worst_loss << ", worst_gain = " << sweep.worst_gain
    << ", nesting failures = " << nesting_failures + sweep.nesting_failures;
  return {sweep.worst_loss <= 1.0 + 1e-12 && sweep.worst_gain <= 1.0 + 1e-12 &&
              nesting_failures == 0 && sweep.nesting_failures == 0,
          d.str()};
}

Outcome criterion_nemytskii() {
  const auto phi = nem::sine_perturbed(0.45, 1024);
  const auto problem = nem::make_problem(phi);
  const auto cfg = rinv::make_descent_config(problem.a, problem.m, 1.0 / phi.inf_phi_prime);
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> size(0.05, 0.5);
  double worst = 0.0;
  bool converged = true;
  for (int i = 0; i < 20; ++i) {
    const auto v = nem::random_field(1024, rng, 1 + i % 6, size(rng));
    const auto r = rinv::solve_local(problem, v, cfg);
    converged = converged && r.converged;
    const nem::GridFunction gap = r.x - nem::exact_inverse(phi, v);
    worst = std::max(worst, nem::sup_norm(gap));
  }
  std::ostringstream d;
  d << "20 targets, max pointwise deviation = " << worst;
  return {converged && worst <= 1e-9, d.str()};
}

rinv::SyntheticLossProblem synthetic_problem(long k_max) {
  rinv::SyntheticLossProblem::Options opts;
  opts.ell_prime = 2.0;
  opts.eps = 0.01;
  return rinv::SyntheticLossProblem(ScaleSpec(8.0, k_max), opts);
}

Outcome criterion_manufactured() {
  const auto start = Clock::now();
  const auto problem = synthetic_problem(1024);
  ScaleVector u_star(problem.spec());
  u_star[1] = 0.1;
  u_star[3] = Complex(0.0, 0.05);
  const ScaleVector v = problem.apply(u_star, 4.0);
  rinv::NashMoserConfig cfg;
  cfg.sigma = 2.0;
  cfg.levels = 10;
  const auto result = rinv::run(problem, v, cfg);
  const double elapsed = seconds_since(start);
  if (!result.converged) return {false, "level " + std::to_string(*result.failed_level) + ": " + result.failure};
  double worst_identity = 0.0;
  std::vector<double> increments;
  for (const auto& level : result.levels) {
    worst_identity = std::max(worst_identity, level.identity_residual);
    increments.push_back(level.z_norm_s1);
  }
  const double error = rinv::norm(result.g - u_star, cfg.s1);
  const double ratio = rinv::fit_geometric_ratio(increments);
  std::ostringstream d;
  d << "levels = " << result.levels.size() << ", max identity residual = " << worst_identity
    << ", |G(v)-u*|_s1 = " << error << ", increment ratio = " << ratio << ", " << elapsed << " s";
  return {result.levels.size() == 10 && worst_identity <= 1e-10 && error <= 1e-6 && ratio < 1.0 &&
              elapsed <= 60.0,
          d.str()};
}

Outcome criterion_uniqueness() {
  const auto problem = synthetic_problem(1024);
  std::mt19937_64 rng(99);

  // Sampled hypotheses on a coarse copy of the scale.
  const auto coarse = synthetic_problem(32);
  rinv::UniquenessCertificate cert;
  cert.left_inverse_defect = rinv::left_inverse_defect(coarse, 100, rng);
  const auto u = rinv::random_scale_vector(coarse.spec(), rng, 8, 2.0, 1.0, 0.05);
  const auto h = rinv::random_scale_vector(coarse.spec(), rng, 8, 2.0, 1.0, 0.05);
  std::vector<double> factors;
  for (int j = 1; j <= 8; ++j) factors.push_back(std::ldexp(1.0, -j));
  const auto ladder = rinv::modulus_ladder(coarse, u, h, 1.0, factors);
  cert.modulus_decreasing = true;
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    cert.modulus_decreasing = cert.modulus_decreasing && ladder[i] < ladder[i - 1];
  }

  rinv::NashMoserConfig a;
  a.sigma = 2.0;
  a.levels = 10;
  rinv::NashMoserConfig b = a;
  b.sigma = 3.0;
  b.levels = 6;
  std::vector<ScaleVector> grid{ScaleVector(problem.spec())};
  for (int i = 1; i < 9; ++i) {
    const auto w = rinv::random_scale_vector(problem.spec(), rng, 3, 1.0, a.s1, 0.02 * i / 8.0);
    grid.push_back(problem.apply(w, 4.0));
  }
  const auto result = rinv::uniqueness_suite(problem, grid, a, b, cert);
  std::ostringstream d;
  d << "max deviation = " << result.max_deviation << ", excluded = " << result.excluded.size()
    << ", left-inverse defect = " << cert.left_inverse_defect
    << ", ladder " << ladder.front() << " -> " << ladder.back()
    << (cert.modulus_decreasing ? " strictly decreasing" : " NOT decreasing");
  return {result.excluded.empty() && result.max_deviation <= 1e-6 && cert.modulus_decreasing,
          d.str()};
}

Outcome criterion_derivatives() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double d = 1e-5;
  double worst_a = 0.0, worst_b = 0.0, worst_c = 0.0;

  const int n = 8;
  for (int i = 0; i < 100; ++i) {
    const Complex z = std::polar(0.9 * std::abs(unit(rng)), std::numbers::pi * unit(rng));
    const Complex h(unit(rng), unit(rng));
    worst_a = std::max(worst_a, rinv::finite_difference_error(
        [](const Complex& x) { return rinv::example_a::polynomial(n, x); },
        [](const Complex& x, const Complex& dir) { return rinv::example_a::derivative(n, x) * dir; },
        z, h, d, [](const Complex& x) { return std::abs(x); }));
  }

  const auto phi = nem::sine_perturbed(0.45, 1024);
  for (int i = 0; i < 100; ++i) {
    const auto u = nem::random_field(1024, rng, 6, 3.0);
    const auto h = nem::random_field(1024, rng, 6, 1.0);
    worst_b = std::max(worst_b, rinv::finite_difference_error(
        [&](const nem::GridFunction& x) { return nem::apply(phi, x); },
        [&](const nem::GridFunction& x, const nem::GridFunction& dir) {
          return nem::apply_derivative(phi, x, dir);
        },
        u, h, d, [](const nem::GridFunction& x) { return nem::sup_norm(x); }));
  }

  const auto problem = synthetic_problem(64);
  for (int i = 0; i < 100; ++i) {
    const auto u = rinv::random_scale_vector(problem.spec(), rng, 16, 1.5, 1.0, 0.5);
    const auto h = rinv::random_scale_vector(problem.spec(), rng, 16, 1.5, 1.0, 1.0);
    worst_c = std::max(worst_c, rinv::finite_difference_error(
        [&](const ScaleVector& x) { return problem.apply(x); },
        [&](const ScaleVector& x, const ScaleVector& dir) { return problem.apply_df(x, dir); },
        u, h, d, [](const ScaleVector& x) { return rinv::norm(x, 1.0); }));
  }
  std::ostringstream s;
  s << "max relative error: example A " << worst_a << ", Nemytskii " << worst_b << ", synthetic "
    << worst_c;
  return {worst_a <= 1e-6 && worst_b <= 1e-6 && worst_c <= 1e-6, s.str()};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    Outcome (*check)();
  };
  const Criterion criteria[] = {
      {"Example A closed-form agreement", criterion_closed_form},
      {"norm bound m/(1-a)", criterion_norm_bound},
      {"residual decay contract", criterion_decay},
      {"continuous-selection closure", criterion_closure},
      {"non-uniqueness census", criterion_census},
      {"tame scale axioms", criterion_scale_axioms},
      {"Nemytskii oracle equivalence", criterion_nemytskii},
      {"Nash-Moser manufactured solution", criterion_manufactured},
      {"uniqueness across schedules", criterion_uniqueness},
      {"derivative consistency", criterion_derivatives},
  };
  const int count = static_cast<int>(std::size(criteria));
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  if (argc > 1 && (only < 1 || only > count)) {
    std::fprintf(stderr, "usage: acceptance [1-%d]\n", count);
    return 2;
  }
  if (only == 0 || only <= 3) solve_example_a_batches();
  for (int id = 1; id <= count; ++id) {
    if (only == 0 || only == id) report(id, criteria[id - 1].name, criteria[id - 1].check);
  }
  return failures == 0 ? 0 : 1;
}
