#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "sketchsp/error.hpp"

// Roofline-style model of the blocked sketch under a one-level cache holding M
// matrix entries. Generating one entry of S costs h memory accesses (h < 1),
// and A is assumed uniformly sparse with density rho.
namespace sketchsp::perf {

struct MachineModel {
  double cache_entries = 0.0;  ///< M
  double rng_cost = 0.0;       ///< h, relative to one memory access
  double balance = 0.0;        ///< B, peak flops per memory operation

  void validate() const {
    SKETCHSP_REQUIRE(cache_entries > 0.0, ConfigError, "cache size M must be positive");
    SKETCHSP_REQUIRE(balance > 0.0, ConfigError, "machine balance B must be positive");
    SKETCHSP_REQUIRE(rng_cost > 0.0 && rng_cost < 1.0, ConfigError, "RNG cost h must lie in (0, 1)");
  }
};

/// Blocks S_sub (d1 x m1), A_sub (m1 x n1), Ahat_sub (d1 x n1).
struct BlockShape {
  double d1 = 1;
  double m1 = 1;
  double n1 = 1;
  bool operator==(const BlockShape&) const = default;
};

enum class Regime { small_rho, large_rho };

inline constexpr std::string_view to_string(Regime r) { return r == Regime::small_rho ? "SMALL_RHO" : "LARGE_RHO"; }

/// E[#rows of an m1 x n1 block holding a nonzero] = m1 (1 - (1 - rho)^n1).
inline double expected_nonzero_rows(double m1, double n1, double rho) {
  SKETCHSP_REQUIRE(rho >= 0.0 && rho <= 1.0, ConfigError, "density must lie in [0, 1]");
  if (n1 <= 0.0 || rho == 0.0) return 0.0;
  if (rho == 1.0) return m1;
  return -m1 * std::expm1(n1 * std::log1p(-rho));
}

/// Cache footprint d1 n1 + m1 n1 rho of one block step.
inline double cache_footprint(const BlockShape& s, double rho) { return s.d1 * s.n1 + s.m1 * s.n1 * rho; }

inline bool feasible(const BlockShape& s, const MachineModel& mm, double rho) {
  return cache_footprint(s, rho) <= mm.cache_entries * (1.0 + 1e-12);
}

/// Reciprocal computational intensity (memory traffic plus h-weighted
/// generation, per block step, times the number of steps):
///   d m n (M + h d1 E[Y]) / (d1 m1 n1).
inline double inverse_ci(const BlockShape& s, const MachineModel& mm, double rho, double d, double m, double n) {
  SKETCHSP_REQUIRE(s.d1 >= 1 && s.m1 >= 1 && s.n1 >= 1, ConfigError, "block dimensions must be >= 1");
  if (!feasible(s, mm, rho))
    throw InfeasibleError("block shape violates d1 n1 + m1 n1 rho <= M (" + std::to_string(cache_footprint(s, rho)) +
                          " > " + std::to_string(mm.cache_entries) + ")");
  return d * m * n * (mm.cache_entries + mm.rng_cost * s.d1 * expected_nonzero_rows(s.m1, s.n1, rho)) /
         (s.d1 * s.m1 * s.n1);
}

/// The objective after substituting d1 = M / (2 n1), m1 = M / (2 n1 rho),
/// divided by d m n:  4 n1 rho / M + h (1 - (1 - rho)^n1) / n1.
inline double blocking_objective(double n1, const MachineModel& mm, double rho) {
  return 4.0 * n1 * rho / mm.cache_entries + mm.rng_cost * expected_nonzero_rows(1.0, n1, rho) / n1;
}

/// Cache-optimal block shape. The 1-D objective in n1 is convex on n1 >= 1,
/// so a golden-section search over the real relaxation on [1, M] followed by
/// an integer scan around its minimizer finds the best integer n1. d1 and m1
/// are then rounded down, which keeps the shape feasible.
inline BlockShape optimize_blocking(const MachineModel& mm, double rho) {
  mm.validate();
  SKETCHSP_REQUIRE(rho > 0.0 && rho <= 1.0, ConfigError, "density must lie in (0, 1]");
  const double upper = std::max(1.0, std::floor(mm.cache_entries));
  auto f = [&](double x) { return blocking_objective(x, mm, rho); };

  double lo = 1.0, hi = upper;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > 1.0) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  double best_n1 = 1.0, best = f(1.0);
  const double scan_lo = std::max(1.0, std::floor(lo) - 2.0);
  const double scan_hi = std::min(upper, std::ceil(hi) + 2.0);
  for (double n1 = scan_lo; n1 <= scan_hi; n1 += 1.0) {
    const double v = f(n1);
    if (v < best) {
      best = v;
      best_n1 = n1;
    }
  }

  for (double n1 = best_n1; n1 >= 1.0; n1 -= 1.0) {
    BlockShape s{std::max(1.0, std::floor(mm.cache_entries / (2.0 * n1))),
                 std::max(1.0, std::floor(mm.cache_entries / (2.0 * n1 * rho))), n1};
    if (feasible(s, mm, rho)) return s;
  }
  throw InfeasibleError("cache of " + std::to_string(mm.cache_entries) + " entries cannot hold a 1x1x1 block");
}

/// Computational intensity at n1 = 1 in the small-rho limit: 2M / (4 + M h).
inline double ci_small_rho(const MachineModel& mm) {
  return 2.0 * mm.cache_entries / (4.0 + mm.cache_entries * mm.rng_cost);
}

/// Attainable fraction of peak: min(1, CI / B) with CI from the chosen regime.
///   small_rho: 2M / (4 + M h) / B
///   large_rho: sqrt(M rho) / (2 B sqrt(h))
inline double peak_fraction(const MachineModel& mm, double rho, Regime regime) {
  const double frac = regime == Regime::small_rho
                          ? ci_small_rho(mm) / mm.balance
                          : std::sqrt(mm.cache_entries * rho) / (2.0 * mm.balance * std::sqrt(mm.rng_cost));
  return std::min(1.0, frac);
}

/// Closed-form minimizer for rho near 1: n1 = sqrt(h M) / (2 sqrt(rho)).
inline double large_rho_block_n(const MachineModel& mm, double rho) {
  return std::sqrt(mm.rng_cost * mm.cache_entries) / (2.0 * std::sqrt(rho));
}

/// Expected values generated by the jki kernel with column blocks of n1 on a
/// uniformly sparse m x n matrix: d (n / n1) E[Y](m, n1).
inline double expected_generated_jki(double d, double m, double n, double rho, double n1) {
  return d * (n / n1) * expected_nonzero_rows(m, n1, rho);
}

/// Values generated by the kji kernel: d nnz = d rho m n.
inline double expected_generated_kji(double d, double m, double n, double rho) { return d * rho * m * n; }

}  // namespace sketchsp::perf
