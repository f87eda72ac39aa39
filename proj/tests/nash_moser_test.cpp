#include <rinv/nash_moser.hpp>
#include <rinv/problems/synthetic.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using rinv::Complex;
using rinv::Errc;
using rinv::NashMoserConfig;
using rinv::ScaleSpec;
using rinv::ScaleVector;
using rinv::SyntheticLossProblem;

namespace {

Errc code_of(const auto& fn) {
  try {
    fn();
  } catch (const rinv::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected rinv::Error";
  return Errc::config;
}

SyntheticLossProblem synthetic(double eps, long k_max) {
  SyntheticLossProblem::Options opts;
  opts.eps = eps;
  return SyntheticLossProblem(ScaleSpec(8.0, k_max), opts);
}

NashMoserConfig small_schedule() {
  NashMoserConfig cfg;
  cfg.sigma = 2.0;
  cfg.levels = 5;
  return cfg;
}

}  // namespace

TEST(DeltaV, AnnuliPartitionTheModes) {
  const ScaleSpec spec(8.0, 64);
  const auto cfg = small_schedule();
  const auto v = rinv::single_mode(spec, 5, 1.0);  // w(5) ~ 5.1: in Pi'_3 but not Pi'_2
  int nonzero = 0;
  for (int n = 1; n <= cfg.levels; ++n) {
    if (!rinv::delta_v(v, n, cfg).is_zero()) {
      ++nonzero;
      EXPECT_EQ(n, 4);
    }
  }
  EXPECT_EQ(nonzero, 1);
}

TEST(DeltaV, TelescopesToLastProjection) {
  const ScaleSpec spec(8.0, 64);
  const auto cfg = small_schedule();
  std::mt19937_64 rng(3);
  const auto v = rinv::random_scale_vector(spec, rng, 64, 1.0, 0.0, 1.0);
  ScaleVector sum(spec);
  for (int n = 1; n <= cfg.levels; ++n) sum += rinv::delta_v(v, n, cfg);
  EXPECT_EQ(sum, rinv::level_projection(v, cfg.levels - 1, cfg));
  EXPECT_TRUE(rinv::delta_v(ScaleVector(spec), 2, cfg).is_zero());
  EXPECT_EQ(code_of([&] { rinv::delta_v(v, 0, cfg); }), Errc::domain);
}

TEST(DefectE, VanishesAtOriginAndIsATailSlice) {
  const auto p = synthetic(0.0, 64);
  const auto cfg = small_schedule();
  EXPECT_TRUE(rinv::defect_e(p, ScaleVector(p.spec()), 3, cfg).is_zero());
  ScaleVector u(p.spec());
  u[2] = 1.0;
  u[6] = 0.5;  // w(6) ~ 6.08 sits in the level-3 window (4, 8]
  const auto e = rinv::defect_e(p, u, 3, cfg);
  EXPECT_EQ(e[2], Complex{});
  EXPECT_NEAR(std::abs(e[6] + 0.5 * p.multiplier(6)), 0.0, 1e-16);
}

TEST(InnerSolve, ZeroRightHandSideGivesZero) {
  const auto p = synthetic(0.01, 64);
  const auto cfg = small_schedule();
  const auto out = rinv::inner_solve(p, ScaleVector(p.spec()), ScaleVector(p.spec()), 3, cfg);
  EXPECT_TRUE(out.z.is_zero());
}

TEST(InnerSolve, LinearCaseMatchesDiagonalInverse) {
  const auto p = synthetic(0.0, 64);
  const auto cfg = small_schedule();
  std::mt19937_64 rng(4);
  const auto rhs =
      rinv::project(rinv::random_scale_vector(p.spec(), rng, 8, 1.0, 1.0, 1e-3), cfg.cutoff(3));
  const auto out = rinv::inner_solve(p, ScaleVector(p.spec()), rhs, 3, cfg);
  const auto expected = rinv::apply_weight_power(rhs, 2.0);
  EXPECT_LE(rinv::norm(out.z - expected, 1.0), 1e-9 * rinv::norm(expected, 1.0));
}

TEST(Run, ZeroTargetGivesZero) {
  const auto p = synthetic(0.01, 64);
  const auto result = rinv::run(p, ScaleVector(p.spec()), small_schedule());
  ASSERT_TRUE(result.converged);
  EXPECT_TRUE(result.g.is_zero());
  for (const auto& level : result.levels) EXPECT_EQ(level.z_norm_s1, 0.0);
}

TEST(Run, LinearCaseRecoversInverseImage) {
  const auto p = synthetic(0.0, 64);
  const auto cfg = small_schedule();
  ScaleVector v(p.spec());
  v[1] = 0.01;
  v[-2] = Complex(0.0, 0.002);
  const auto result = rinv::run(p, v, cfg);
  ASSERT_TRUE(result.converged);
  const auto expected = rinv::apply_weight_power(v, 2.0);
  EXPECT_LE(rinv::norm(result.g - expected, cfg.s1), 1e-10);
}

TEST(Run, LevelInvariantsOnManufacturedTarget) {
  const auto p = synthetic(0.01, 128);
  auto cfg = small_schedule();
  cfg.levels = 7;
  ScaleVector u_star(p.spec());
  u_star[1] = 0.1;
  u_star[3] = Complex(0.0, 0.05);
  const auto v = p.apply(u_star, 4.0);
  const auto result = rinv::run(p, v, cfg);
  ASSERT_TRUE(result.converged) << result.failure;
  ASSERT_EQ(result.levels.size(), 7u);
  for (const auto& level : result.levels) {
    EXPECT_EQ(rinv::project(level.u, level.cutoff), level.u) << level.n;
    EXPECT_LE(level.identity_residual, 1e-10) << level.n;
  }
  EXPECT_LE(rinv::norm(result.g - u_star, cfg.s1), 1e-6);
}

TEST(Run, TargetOutsideRadiusIsRejected) {
  const auto p = synthetic(0.01, 64);
  auto cfg = small_schedule();
  cfg.r = 1e-3;
  ScaleVector v(p.spec());
  v[1] = 1.0;
  EXPECT_EQ(code_of([&] { rinv::run(p, v, cfg); }), Errc::out_of_radius);
}

TEST(Run, LevelFailureReturnsPartialTrace) {
  const auto p = synthetic(0.01, 64);
  auto cfg = small_schedule();
  cfg.inner_radius = 0.01;
  ScaleVector v(p.spec());
  v[1] = 0.05;
  const auto result = rinv::run(p, v, cfg);
  EXPECT_FALSE(result.converged);
  ASSERT_TRUE(result.failed_level.has_value());
  EXPECT_EQ(result.levels.size(), static_cast<std::size_t>(*result.failed_level - 1));
  EXPECT_FALSE(result.failure.empty());
}

TEST(Config, ScheduleMustFitTruncation) {
  const auto p = synthetic(0.01, 64);
  NashMoserConfig cfg;
  cfg.levels = 10;  // Lambda_10 = 1024 > w(64)
  EXPECT_EQ(code_of([&] { cfg.validate(p.constants(), p.spec()); }), Errc::config);
  cfg = small_schedule();
  cfg.delta = cfg.s1 + 1.0;  // needs delta > s1 + l'
  EXPECT_EQ(code_of([&] { cfg.validate(p.constants(), p.spec()); }), Errc::config);
  cfg = small_schedule();
  cfg.sigma = 1.0;
  EXPECT_EQ(code_of([&] { cfg.validate(p.constants(), p.spec()); }), Errc::config);
  EXPECT_NO_THROW(small_schedule().validate(p.constants(), p.spec(), true));
}

TEST(Uniqueness, LinearSchedulesAgree) {
  const auto p = synthetic(0.0, 256);
  NashMoserConfig a;
  a.levels = 8;
  NashMoserConfig b = a;
  b.sigma = 3.0;
  b.levels = 5;
  std::vector<ScaleVector> grid{ScaleVector(p.spec())};
  std::mt19937_64 rng(6);
  for (int i = 0; i < 3; ++i) {
    grid.push_back(rinv::random_scale_vector(p.spec(), rng, 4, 1.0, 1.0, 1e-3));
  }
  rinv::UniquenessCertificate cert;
  cert.modulus_decreasing = true;
  const auto report = rinv::uniqueness_suite(p, grid, a, b, cert);
  EXPECT_TRUE(report.excluded.empty());
  EXPECT_LE(report.max_deviation, 1e-10);
  EXPECT_EQ(report.deviations.front(), 0.0);
}

TEST(Uniqueness, MissingCertificateIsInadmissible) {
  const auto p = synthetic(0.0, 64);
  rinv::UniquenessCertificate cert;
  cert.left_inverse_defect = 1.0;
  EXPECT_EQ(code_of([&] {
              rinv::uniqueness_suite(p, {}, small_schedule(), small_schedule(), cert);
            }),
            Errc::inadmissible);
}

TEST(Continuity, RatioIsStableUnderRefinement) {
  const auto p = synthetic(0.01, 64);
  const auto cfg = small_schedule();
  ScaleVector v(p.spec());
  v[1] = 0.004;
  v[2] = Complex(0.0, 0.002);
  ScaleVector dv(p.spec());
  dv[1] = Complex(1.0, 1.0);
  dv[3] = 0.5;
  dv *= 1e-3 * cfg.r / rinv::norm(dv, cfg.delta) * 1e-3;
  const double c1 = rinv::continuity_ratio(p, v, dv, cfg);
  const double c2 = rinv::continuity_ratio(p, v, 0.5 * dv, cfg);
  EXPECT_GT(c1, 0.0);
  EXPECT_NEAR(c1 / c2, 1.0, 1e-3);
}

TEST(GeometricFit, RecoversRatio) {
  std::vector<double> values;
  for (int i = 0; i < 6; ++i) values.push_back(3.0 * std::pow(0.4, i));
  EXPECT_NEAR(rinv::fit_geometric_ratio(values), 0.4, 1e-12);
  values.push_back(0.0);
  EXPECT_NEAR(rinv::fit_geometric_ratio(values), 0.4, 1e-12);
  EXPECT_TRUE(std::isnan(rinv::fit_geometric_ratio({1.0})));
}

TEST(LevelsCsv, HeaderAndRows) {
  const auto p = synthetic(0.0, 64);
  ScaleVector v(p.spec());
  v[1] = 0.01;
  const auto result = rinv::run(p, v, small_schedule());
  std::ostringstream out;
  rinv::write_levels_csv(out, result);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "n,lambda,z_norm_s1,e_norm_s0,identity_residual,g_norm_s1");
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, result.levels.size());
}
