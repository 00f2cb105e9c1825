#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "sketchsp/generators.hpp"
#include "sketchsp/perf_model.hpp"
#include "sketchsp/sketch.hpp"

using namespace sketchsp;
using namespace sketchsp::perf;

namespace {

// Objective straight from the reciprocal intensity with the cache-saturating
// d1 and m1 left unrounded, scaled by 1 / (d m n).
double objective_from_inverse_ci(double n1, const MachineModel& mm, double rho) {
  const BlockShape s{mm.cache_entries / (2.0 * n1), mm.cache_entries / (2.0 * n1 * rho), n1};
  return inverse_ci(s, mm, rho, 1.0, 1.0, 1.0);
}

double scan_minimum(const MachineModel& mm, double rho, double* argmin = nullptr) {
  double best = std::numeric_limits<double>::infinity(), arg = 1.0;
  for (double n1 = 1.0; n1 <= std::floor(mm.cache_entries); n1 += 1.0) {
    const double f = 4.0 * n1 * rho / mm.cache_entries + mm.rng_cost * (1.0 - std::pow(1.0 - rho, n1)) / n1;
    if (f < best) {
      best = f;
      arg = n1;
    }
  }
  if (argmin) *argmin = arg;
  return best;
}

}  // namespace

TEST(ExpectedNonzeroRows, ClosedFormEdges) {
  EXPECT_DOUBLE_EQ(expected_nonzero_rows(100, 5, 1.0), 100.0);
  EXPECT_DOUBLE_EQ(expected_nonzero_rows(100, 5, 0.0), 0.0);
  EXPECT_NEAR(expected_nonzero_rows(100, 1, 0.3), 30.0, 1e-12);
  EXPECT_NEAR(expected_nonzero_rows(10, 2, 0.5), 7.5, 1e-12);
  // tiny rho stays accurate: m1 (1 - (1 - rho)^n1) ~ m1 n1 rho
  EXPECT_NEAR(expected_nonzero_rows(1e6, 3, 1e-12), 3e-6, 1e-15);
  EXPECT_THROW(expected_nonzero_rows(1, 1, -0.1), ConfigError);
}

TEST(ExpectedNonzeroRows, MonteCarlo) {
  std::mt19937_64 gen(12345);
  const struct {
    int m1, n1;
    double rho;
  } cases[] = {{50, 1, 0.1}, {50, 4, 0.05}, {20, 10, 0.2}, {100, 3, 0.01}, {30, 30, 0.02}};
  for (const auto& c : cases) {
    std::bernoulli_distribution bern(c.rho);
    const int trials = 10000;
    double sum = 0.0, sum2 = 0.0;
    for (int t = 0; t < trials; ++t) {
      int y = 0;
      for (int i = 0; i < c.m1; ++i) {
        bool any = false;
        for (int k = 0; k < c.n1; ++k) any |= bern(gen);
        y += any;
      }
      sum += y;
      sum2 += static_cast<double>(y) * y;
    }
    const double mean = sum / trials, se = std::sqrt((sum2 / trials - mean * mean) / trials);
    EXPECT_NEAR(expected_nonzero_rows(c.m1, c.n1, c.rho), mean, 3.0 * se) << c.m1 << " " << c.n1 << " " << c.rho;
  }
}

TEST(BlockingObjective, MatchesReciprocalIntensity) {
  const MachineModel mm{1e4, 0.04, 10.0};
  for (double rho : {1e-5, 1e-3, 0.1, 1.0})
    for (double n1 : {1.0, 2.0, 7.0, 50.0})
      EXPECT_NEAR(blocking_objective(n1, mm, rho), objective_from_inverse_ci(n1, mm, rho),
                  1e-12 * objective_from_inverse_ci(n1, mm, rho));
}

TEST(InverseCi, FeasibilityEnforced) {
  const MachineModel mm{1000, 0.1, 5};
  EXPECT_NO_THROW(inverse_ci({500, 500, 1}, mm, 1.0, 10, 10, 10));
  EXPECT_THROW(inverse_ci({501, 500, 1}, mm, 1.0, 10, 10, 10), InfeasibleError);
  EXPECT_THROW(inverse_ci({0, 500, 1}, mm, 1.0, 10, 10, 10), ConfigError);
}

TEST(OptimizeBlocking, AttainsScanMinimumOnGrid) {
  for (double M : {1e3, 1e4, 5e4})
    for (double h : {0.01, 0.1, 0.5, 0.9})
      for (double rho : {1e-6, 1e-4, 1e-2, 0.1, 0.5, 1.0}) {
        const MachineModel mm{M, h, 10.0};
        const auto s = optimize_blocking(mm, rho);
        const double best = scan_minimum(mm, rho);
        EXPECT_LE(blocking_objective(s.n1, mm, rho), best * (1.0 + 1e-3)) << M << " " << h << " " << rho;
        EXPECT_TRUE(feasible(s, mm, rho));
        EXPECT_EQ(s.d1, std::floor(M / (2.0 * s.n1)));
        EXPECT_EQ(s.m1, std::floor(M / (2.0 * s.n1 * rho)));
      }
}

TEST(OptimizeBlocking, SmallRhoGivesUnitN1WhenMhRhoBelowEight) {
  for (double M : {1e3, 1e4, 1e5})
    for (double h : {0.01, 0.1, 0.5})
      for (double rho : {1e-7, 1e-6, 1e-5, 1e-4}) {
        const MachineModel mm{M, h, 1.0};
        if (M * h * rho >= 8.0) continue;
        EXPECT_EQ(optimize_blocking(mm, rho).n1, 1.0) << M << " " << h << " " << rho;
      }
  // Past the threshold the optimum moves off 1.
  EXPECT_GT(optimize_blocking({1e6, 0.5, 1.0}, 1e-4).n1, 1.0);
}

TEST(OptimizeBlocking, LargeRhoNearClosedForm) {
  for (double M : {1e4, 1e5, 1e6})
    for (double h : {0.01, 0.04, 0.2})
      for (double rho : {0.5, 0.75, 1.0}) {
        const MachineModel mm{M, h, 1.0};
        const double n1 = optimize_blocking(mm, rho).n1;
        EXPECT_LE(std::abs(n1 - large_rho_block_n(mm, rho)), 1.0) << M << " " << h << " " << rho;
      }
  const auto s = optimize_blocking({1e4, 0.04, 1.0}, 1.0);
  EXPECT_LE(std::abs(s.n1 - 10.0), 1.0);
}

TEST(OptimizeBlocking, RejectsInvalidModels) {
  EXPECT_THROW(optimize_blocking({1e4, 1.5, 1.0}, 0.1), ConfigError);
  EXPECT_THROW(optimize_blocking({1e4, 0.0, 1.0}, 0.1), ConfigError);
  EXPECT_THROW(optimize_blocking({0.0, 0.5, 1.0}, 0.1), ConfigError);
  EXPECT_THROW(optimize_blocking({1e4, 0.5, 0.0}, 0.1), ConfigError);
  EXPECT_THROW(optimize_blocking({1e4, 0.5, 1.0}, 0.0), ConfigError);
}

TEST(PeakFraction, SmallAndLargeRho) {
  const MachineModel mm{1e4, 0.04, 10.0};
  const double ci = ci_small_rho(mm);
  EXPECT_NEAR(ci, 2e4 / (4.0 + 400.0), 1e-12);
  const MachineModel slow{1e4, 0.04, 100.0};
  EXPECT_NEAR(peak_fraction(slow, 1e-6, Regime::small_rho), ci / 100.0, 1e-12);
  EXPECT_NEAR(peak_fraction(slow, 0.01, Regime::large_rho), std::sqrt(100.0) / (2.0 * 100.0 * 0.2), 1e-12);
  EXPECT_EQ(peak_fraction({1e4, 0.04, 0.01}, 1e-6, Regime::small_rho), 1.0);
  // The small-rho intensity is what inverse_ci gives at n1 = 1 as rho -> 0.
  const BlockShape s{mm.cache_entries / 2.0, mm.cache_entries / 2.0 / 1e-9, 1.0};
  const double exact = 2.0 * 1e-9 / inverse_ci(s, mm, 1e-9, 1, 1, 1);
  EXPECT_NEAR(exact, ci, 1e-6 * ci);
  EXPECT_EQ(to_string(Regime::small_rho), "SMALL_RHO");
  EXPECT_EQ(to_string(Regime::large_rho), "LARGE_RHO");
}

TEST(GenerationEstimates, MatchRealizedCountsOnUniformMatrices) {
  const index_t m = 4000, n = 60, d = 8;
  const double rho = 0.002;
  for (index_t n1 : {1, 5, 20}) {
    double mean = 0.0;
    const int reps = 20;
    for (int r = 0; r < reps; ++r) {
      const auto a = gen_uniform_sparse(m, n, rho, 100 + r);
      SketchConfig cfg;
      cfg.d = d;
      cfg.block_n = n1;
      cfg.block_d = d;
      cfg.variant = KernelVariant::jki;
      mean += static_cast<double>(sketch(a, cfg).stats.generated) / reps;
    }
    const double expect = expected_generated_jki(d, m, n, rho, n1);
    EXPECT_NEAR(mean, expect, 0.03 * expect) << n1;
  }
  EXPECT_DOUBLE_EQ(expected_generated_kji(10, 100, 20, 0.1), 2000.0);
  EXPECT_NEAR(expected_generated_jki(10, 100, 20, 1e-9, 1), expected_generated_kji(10, 100, 20, 1e-9), 1e-12);
}
