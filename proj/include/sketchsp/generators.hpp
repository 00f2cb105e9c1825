#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sketchsp/error.hpp"
#include "sketchsp/rng.hpp"
#include "sketchsp/sparse.hpp"

namespace sketchsp {

/// m x n matrix whose entries are independently nonzero with probability
/// `rho`; nonzero values are iid uniform on (-1, 1). Columns are filled by
/// geometric skipping, so the cost is O(n + nnz).
inline CscMatrix gen_uniform_sparse(index_t m, index_t n, double rho, std::uint64_t seed) {
  SKETCHSP_REQUIRE(m >= 0 && n >= 0, ConfigError, "negative dimensions");
  SKETCHSP_REQUIRE(rho > 0.0 && rho <= 1.0, ConfigError, "density must lie in (0, 1]");
  Xoshiro256 rng(seed);
  std::vector<index_t> cp{0}, ri;
  std::vector<double> v;
  const auto expected = static_cast<std::size_t>(rho * static_cast<double>(m) * static_cast<double>(n) * 1.01) + 16;
  ri.reserve(expected);
  v.reserve(expected);
  const double log_q = std::log1p(-rho);
  for (index_t k = 0; k < n; ++k) {
    if (rho == 1.0) {
      for (index_t i = 0; i < m; ++i) {
        ri.push_back(i);
        v.push_back(rng.uniform_pm1());
      }
    } else {
      index_t i = -1;
      for (;;) {
        const double skip = std::floor(std::log(rng.uniform01()) / log_q);
        if (skip >= static_cast<double>(m - i - 1)) break;
        i += static_cast<index_t>(skip) + 1;
        ri.push_back(i);
        v.push_back(rng.uniform_pm1());
      }
    }
    cp.push_back(static_cast<index_t>(ri.size()));
  }
  return CscMatrix::from_parts_unchecked(m, n, std::move(cp), std::move(ri), std::move(v));
}

/// Synthetic matrices with extreme sparsity patterns.
///   a: every 1000th row (1-based) fully dense, all other rows empty
///   b: density 1e-3 with 2998/3000 of the entries uniformly placed inside the
///      middle third of the columns, the rest uniformly in the outer thirds
///   c: every 1000th column (1-based) fully dense, all other columns empty
enum class AbnormalKind { a, b, c };

inline AbnormalKind parse_abnormal_kind(std::string_view s) {
  if (s.starts_with("abnormal-")) s.remove_prefix(9);
  if (s == "a" || s == "A") return AbnormalKind::a;
  if (s == "b" || s == "B") return AbnormalKind::b;
  if (s == "c" || s == "C") return AbnormalKind::c;
  throw ConfigError("unknown abnormal kind '" + std::string(s) + "'");
}

inline constexpr index_t kAbnormalStride = 1000;
inline constexpr double kAbnormalDensity = 1e-3;

namespace detail {

// Draws `count` distinct cells uniformly from rows [0, m) x cols [c0, c1).
inline void sample_distinct_cells(index_t m, index_t c0, index_t c1, index_t count, Xoshiro256& rng,
                                  std::vector<Entry>& out) {
  const index_t width = c1 - c0;
  const auto cells = static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(width);
  if (count <= 0 || cells == 0) return;
  count = static_cast<index_t>(std::min<std::uint64_t>(static_cast<std::uint64_t>(count), cells));
  std::vector<std::uint64_t> picks;
  picks.reserve(static_cast<std::size_t>(count));
  while (static_cast<index_t>(picks.size()) < count) {
    const auto need = static_cast<std::size_t>(count) - picks.size();
    for (std::size_t t = 0; t < need; ++t) {
      // Multiply-shift range reduction; bias is below 2^-32 for these sizes.
      const auto w = static_cast<unsigned __int128>(rng()) * cells;
      picks.push_back(static_cast<std::uint64_t>(w >> 64));
    }
    std::sort(picks.begin(), picks.end());
    picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
  }
  for (auto cell : picks) {
    const auto row = static_cast<index_t>(cell % static_cast<std::uint64_t>(m));
    const auto col = c0 + static_cast<index_t>(cell / static_cast<std::uint64_t>(m));
    out.push_back({row, col, rng.uniform_pm1()});
  }
}

}  // namespace detail

inline CscMatrix gen_abnormal(AbnormalKind kind, index_t m, index_t n, std::uint64_t seed = 0) {
  SKETCHSP_REQUIRE(m >= 1 && n >= 1, ConfigError, "dimensions must be positive");
  Xoshiro256 rng(seed);
  std::vector<Entry> entries;
  switch (kind) {
    case AbnormalKind::a: {
      SKETCHSP_REQUIRE(m >= kAbnormalStride, ConfigError,
                       "abnormal-a needs m >= " + std::to_string(kAbnormalStride) + " (stride exceeds m)");
      std::vector<index_t> cp{0}, ri;
      std::vector<double> v;
      for (index_t k = 0; k < n; ++k) {
        for (index_t r = kAbnormalStride - 1; r < m; r += kAbnormalStride) {
          ri.push_back(r);
          v.push_back(rng.uniform_pm1());
        }
        cp.push_back(static_cast<index_t>(ri.size()));
      }
      return CscMatrix::from_parts_unchecked(m, n, std::move(cp), std::move(ri), std::move(v));
    }
    case AbnormalKind::c: {
      SKETCHSP_REQUIRE(n >= kAbnormalStride, ConfigError,
                       "abnormal-c needs n >= " + std::to_string(kAbnormalStride) + " (stride exceeds n)");
      std::vector<index_t> cp{0}, ri;
      std::vector<double> v;
      for (index_t k = 0; k < n; ++k) {
        if ((k + 1) % kAbnormalStride == 0) {
          for (index_t r = 0; r < m; ++r) {
            ri.push_back(r);
            v.push_back(rng.uniform_pm1());
          }
        }
        cp.push_back(static_cast<index_t>(ri.size()));
      }
      return CscMatrix::from_parts_unchecked(m, n, std::move(cp), std::move(ri), std::move(v));
    }
    case AbnormalKind::b: {
      SKETCHSP_REQUIRE(n >= 3, ConfigError, "abnormal-b needs n >= 3");
      const auto target = std::max<index_t>(
          1, static_cast<index_t>(std::llround(kAbnormalDensity * static_cast<double>(m) * static_cast<double>(n))));
      const index_t c0 = n / 3, c1 = 2 * n / 3;
      const auto inner = static_cast<index_t>(std::llround(static_cast<double>(target) * 2998.0 / 3000.0));
      const index_t outer = target - inner;
      detail::sample_distinct_cells(m, c0, c1, inner, rng, entries);
      // The outer thirds are sampled as one virtual block, then split.
      std::vector<Entry> rest;
      detail::sample_distinct_cells(m, 0, c0 + (n - c1), outer, rng, rest);
      for (auto& e : rest)
        if (e.col >= c0) e.col += c1 - c0;
      entries.insert(entries.end(), rest.begin(), rest.end());
      return CscMatrix::from_entries(m, n, std::move(entries));
    }
  }
  throw ConfigError("unknown abnormal kind");
}

}  // namespace sketchsp
