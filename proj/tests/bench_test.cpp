#include <gtest/gtest.h>

#include "tbprop/bench.hpp"

using namespace tbprop;

TEST(Bench, DimerSpeedupAndAgreement) {
  BenchCase c;
  c.n_modes = 2;
  c.cutoff = 20;
  c.repetitions = 5;
  auto rep = run_bench_case(c);
  ASSERT_TRUE(rep.fock.has_value());
  EXPECT_EQ(rep.dimension.value(), 441u);
  EXPECT_LE(rep.agreement.value(), 1e-6);
  EXPECT_GE(rep.speedup.value(), 1e2);
  EXPECT_LE(rep.analytic.min_s, rep.analytic.median_s);
  EXPECT_LE(rep.analytic.median_s, rep.analytic.max_s);
}

TEST(Bench, InfeasibleCaseIsRecorded) {
  BenchCase c;
  c.n_modes = 6;
  c.cutoff = 20;
  c.repetitions = 5;
  auto rep = run_bench_case(c, FockOptions{100000, 1e-14});
  EXPECT_EQ(rep.fock_status, "infeasible");
  EXPECT_EQ(rep.dimension.value(), 85766121u);
  EXPECT_FALSE(rep.fock.has_value());
  EXPECT_GT(rep.analytic.median_s, 0.0);
}

TEST(Bench, RefusesSharedProcess) {
  detail::ActivityScope busy;
  EXPECT_THROW(run_bench_case(BenchCase{}), ResourceError);
}

TEST(Bench, ValidatesCase) {
  BenchCase c;
  c.repetitions = 3;
  EXPECT_THROW(run_bench_case(c), ValidationError);
  c.repetitions = 5;
  c.xi = {0.1};
  EXPECT_THROW(run_bench_case(c), ValidationError);
}

TEST(Bench, AnalyticPathGrowsPolynomially) {
  std::vector<std::size_t> sizes;
  for (std::size_t n = 2; n <= 16; n += 2) sizes.push_back(n);
  EXPECT_LT(fit_exponent(analytic_scaling(sizes)), 3.0);
}

TEST(Bench, FitExponentOfPowerLaw) {
  EXPECT_NEAR(fit_exponent({{1, 2}, {2, 16}, {4, 128}}), 3.0, 1e-12);
}

TEST(Bench, JsonReport) {
  BenchCase c;
  c.n_modes = 2;
  c.cutoff = 14;
  c.repetitions = 5;
  auto j = to_json(run_benchmark({c}));
  EXPECT_EQ(j["schema"], "tbprop-bench/1");
  ASSERT_EQ(j["cases"].size(), 1u);
  EXPECT_EQ(j["cases"][0]["dimension"], 225);
  EXPECT_TRUE(j["cases"][0]["speedup"].is_number());
  EXPECT_TRUE(j["machine"]["compiler"].is_string());
}

TEST(Bench, RefusesToTimeDisagreeingPaths) {
  // Cutoff 6 truncates the squeezed vacuum enough to move photon numbers by ~5e-6.
  BenchCase c;
  c.n_modes = 2;
  c.cutoff = 6;
  c.repetitions = 5;
  EXPECT_THROW(run_bench_case(c), NumericError);
}
