#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "sketchsp/dense.hpp"
#include "sketchsp/error.hpp"
#include "sketchsp/rng.hpp"
#include "sketchsp/sparse.hpp"

namespace sketchsp {

/// Loop order of the compute kernel. kji walks A by columns (CSC) and
/// regenerates a column of S for every nonzero; jki walks a CSR block by rows
/// and reuses each regenerated column of S across the whole row.
enum class KernelVariant { kji, jki };

inline constexpr std::string_view to_string(KernelVariant v) { return v == KernelVariant::kji ? "kji" : "jki"; }

inline KernelVariant parse_kernel_variant(std::string_view s) {
  if (s == "kji") return KernelVariant::kji;
  if (s == "jki") return KernelVariant::jki;
  throw ConfigError("unknown kernel variant '" + std::string(s) + "'");
}

inline constexpr index_t kDefaultBlockN = 500;
inline constexpr index_t kDefaultBlockD = 3000;

struct SketchConfig {
  index_t d = 1;                    ///< rows of S (sketch size)
  index_t block_n = kDefaultBlockN; ///< columns of A per tile
  index_t block_d = kDefaultBlockD; ///< rows of S per tile
  KernelVariant variant = KernelVariant::kji;
  Distribution dist = Distribution::uniform;
  GeneratorMode mode = GeneratorMode::counter;
  std::uint64_t seed = 0;
  int threads = 1;
  bool time_sampling = false;       ///< instrument get_samples (perturbs totals)
};

/// d = ceil(gamma n), tolerant of the representation error in gamma * n.
inline index_t sketch_rows(double gamma, index_t n) {
  SKETCHSP_REQUIRE(gamma > 0.0, ConfigError, "gamma must be positive");
  return std::max<index_t>(1, static_cast<index_t>(std::ceil(gamma * static_cast<double>(n) - 1e-9)));
}

struct KernelStats {
  std::uint64_t generated = 0;       ///< random values produced
  std::uint64_t column_updates = 0;  ///< length-d1 axpy updates of the output
  std::uint64_t kernel_calls = 0;
};

struct SketchStats {
  std::uint64_t generated = 0;
  std::uint64_t column_updates = 0;
  std::uint64_t kernel_calls = 0;
  index_t tiles = 0;
  int workers = 0;
  double conversion_seconds = 0.0;  ///< CSC -> blocked CSR (jki only)
  double compute_seconds = 0.0;
  double sample_seconds = 0.0;      ///< mean per worker; 0 unless time_sampling
};

struct SketchResult {
  DenseMatrix ahat;
  SketchStats stats;
};

/// Column range [begin, end) of a CSC matrix.
struct CscSlice {
  const CscMatrix* a = nullptr;
  index_t begin = 0;
  index_t end = 0;
};

namespace detail {

inline void axpy(double* y, double a, const double* x, index_t len) {
  for (index_t i = 0; i < len; ++i) y[i] += a * x[i];
}

}  // namespace detail

/// kji kernel: out[:, k] += A[j, k] * S[r : r + d1, j] for every stored
/// (j, k) of the slice, with S regenerated per nonzero. `work` must hold at
/// least out.nrows values.
inline void kernel_kji(DenseView out, CscSlice a, index_t r, SketchSampler& sampler, std::span<double> work,
                       KernelStats& stats) {
  const index_t d1 = out.nrows;
  const auto v = work.first(static_cast<std::size_t>(d1));
  const auto rows = a.a->row_idx();
  const auto vals = a.a->values();
  const std::uint64_t before = sampler.generated();
  for (index_t k = a.begin; k < a.end; ++k) {
    double* dst = out.col(k - a.begin);
    for (index_t p = a.a->col_begin(k); p < a.a->col_end(k); ++p) {
      sampler.set_state(r, rows[p]);
      sampler.get_samples(v);
      detail::axpy(dst, vals[p], v.data(), d1);
      ++stats.column_updates;
    }
  }
  stats.generated += sampler.generated() - before;
  ++stats.kernel_calls;
}

/// jki kernel: for every row j of the block holding entries, regenerate
/// S[r : r + d1, j] once and apply it to each entry of the row. Empty rows
/// generate nothing.
inline void kernel_jki(DenseView out, const CsrBlock& block, index_t r, SketchSampler& sampler,
                       std::span<double> work, KernelStats& stats) {
  const index_t d1 = out.nrows;
  const auto v = work.first(static_cast<std::size_t>(d1));
  const index_t m = static_cast<index_t>(block.row_ptr.size()) - 1;
  const std::uint64_t before = sampler.generated();
  for (index_t j = 0; j < m; ++j) {
    const index_t p0 = block.row_ptr[j], p1 = block.row_ptr[j + 1];
    if (p0 == p1) continue;
    sampler.set_state(r, j);
    sampler.get_samples(v);
    for (index_t p = p0; p < p1; ++p) {
      detail::axpy(out.col(block.col_idx[p]), block.values[p], v.data(), d1);
      ++stats.column_updates;
    }
  }
  stats.generated += sampler.generated() - before;
  ++stats.kernel_calls;
}

namespace detail {

struct EffectiveBlocks {
  index_t bn;
  index_t bd;
};

inline EffectiveBlocks validate_config(const CscMatrix& a, const SketchConfig& cfg) {
  SKETCHSP_REQUIRE(cfg.d >= 1, ConfigError, "sketch size d must be >= 1");
  SKETCHSP_REQUIRE(cfg.block_n >= 1, ConfigError, "block_n must be >= 1");
  SKETCHSP_REQUIRE(cfg.block_d >= 1, ConfigError, "block_d must be >= 1");
  SKETCHSP_REQUIRE(cfg.threads >= 1, ConfigError, "threads must be >= 1");
  return {std::max<index_t>(1, std::min(cfg.block_n, a.ncols())), std::min(cfg.block_d, cfg.d)};
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline CsrBlock scaled_block(const CsrBlock& b, double f) {
  CsrBlock out = b;
  for (auto& v : out.values) v *= f;
  return out;
}

// Runs the outer blocking over the (column-block, row-block) tile grid. Tiles
// write disjoint parts of the output, so workers need no synchronization.
inline SketchResult run_tiles(const CscMatrix& a, const BlockedCsrMatrix* blocked, const SketchConfig& cfg,
                              EffectiveBlocks eb) {
  SketchResult res{DenseMatrix(cfg.d, a.ncols()), {}};
  const index_t nb_n = (a.ncols() + eb.bn - 1) / eb.bn;
  const index_t nb_d = (cfg.d + eb.bd - 1) / eb.bd;
  const index_t tiles = nb_n * nb_d;
  const int workers = static_cast<int>(std::clamp<index_t>(cfg.threads, 1, std::max<index_t>(tiles, 1)));
  res.stats.tiles = tiles;
  res.stats.workers = workers;

  std::vector<KernelStats> wstats(static_cast<std::size_t>(workers));
  std::vector<double> wsample(static_cast<std::size_t>(workers), 0.0);
  std::atomic<index_t> next{0};
  auto worker = [&](int id) {
    SketchSampler sampler(cfg.seed, cfg.mode, cfg.dist);
    sampler.enable_timing(cfg.time_sampling);
    std::vector<double> work(static_cast<std::size_t>(eb.bd));
    for (index_t t = next++; t < tiles; t = next++) {
      const index_t jb = t / nb_d, ib = t % nb_d;
      const index_t c0 = jb * eb.bn, c1 = std::min(a.ncols(), c0 + eb.bn);
      const index_t r0 = ib * eb.bd, r1 = std::min(cfg.d, r0 + eb.bd);
      DenseView out = DenseView::block(res.ahat, r0, c0, r1 - r0, c1 - c0);
      if (cfg.variant == KernelVariant::kji) {
        kernel_kji(out, {&a, c0, c1}, r0, sampler, work, wstats[id]);
      } else {
        kernel_jki(out, blocked->blocks[jb], r0, sampler, work, wstats[id]);
      }
    }
    wsample[id] = sampler.sample_seconds();
  };

  const auto t0 = std::chrono::steady_clock::now();
  if (workers == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (int id = 0; id < workers; ++id) pool.emplace_back(worker, id);
  }
  res.stats.compute_seconds = seconds_since(t0);
  for (int id = 0; id < workers; ++id) {
    res.stats.generated += wstats[id].generated;
    res.stats.column_updates += wstats[id].column_updates;
    res.stats.kernel_calls += wstats[id].kernel_calls;
    res.stats.sample_seconds += wsample[id];
  }
  res.stats.sample_seconds /= workers;
  return res;
}

}  // namespace detail

/// Computes S A with S regenerated on the fly, tiled ceil(d / b_d) x
/// ceil(n / b_n). Each output entry accumulates its terms in ascending row
/// order of A, so counter-mode results are bit-identical across kernels,
/// block sizes and thread counts. The jki variant converts A to blocked CSR
/// first and reports that time as conversion_seconds.
inline SketchResult sketch(const CscMatrix& a, const SketchConfig& cfg) {
  const auto eb = detail::validate_config(a, cfg);
  const bool scaled = cfg.dist == Distribution::uniform_scaled;
  std::optional<CscMatrix> a_scaled;
  if (scaled) a_scaled = a.scaled(scaled_sketch_factor());
  const CscMatrix& src = scaled ? *a_scaled : a;

  if (cfg.variant == KernelVariant::kji) return detail::run_tiles(src, nullptr, cfg, eb);

  const auto t0 = std::chrono::steady_clock::now();
  const auto blocked = to_blocked_csr(src, eb.bn, cfg.threads);
  const double conversion = detail::seconds_since(t0);
  auto res = detail::run_tiles(src, &blocked, cfg, eb);
  res.stats.conversion_seconds = conversion;
  return res;
}

/// jki sketch with a caller-supplied blocked CSR copy of `a` whose block width
/// matches the effective b_n. No conversion time is reported.
inline SketchResult sketch(const CscMatrix& a, const BlockedCsrMatrix& blocked, const SketchConfig& cfg) {
  const auto eb = detail::validate_config(a, cfg);
  SKETCHSP_REQUIRE(cfg.variant == KernelVariant::jki, ConfigError, "blocked input requires the jki variant");
  SKETCHSP_REQUIRE(blocked.nrows == a.nrows() && blocked.ncols == a.ncols(), ConfigError,
                   "blocked matrix shape differs from A");
  SKETCHSP_REQUIRE(blocked.block_width == eb.bn, ConfigError,
                   "blocked matrix width " + std::to_string(blocked.block_width) + " != b_n " +
                       std::to_string(eb.bn));
  if (cfg.dist != Distribution::uniform_scaled) return detail::run_tiles(a, &blocked, cfg, eb);
  const double f = scaled_sketch_factor();
  BlockedCsrMatrix bs = blocked;
  for (auto& b : bs.blocks) b = detail::scaled_block(b, f);
  return detail::run_tiles(a.scaled(f), &bs, cfg, eb);
}

inline constexpr double kDefaultExplicitCap = 1e8;

/// Materialized S for the given configuration (counter mode, d x m).
inline DenseMatrix materialize_sketch_operator(index_t d, index_t m, std::uint64_t seed, Distribution dist,
                                               double cap = kDefaultExplicitCap) {
  SKETCHSP_REQUIRE(static_cast<double>(d) * static_cast<double>(m) <= cap, ConfigError,
                   "explicit S of " + std::to_string(d) + "x" + std::to_string(m) + " exceeds the cap");
  DenseMatrix s(d, m);
  SketchSampler sampler(seed, GeneratorMode::counter, dist);
  for (index_t j = 0; j < m; ++j) {
    sampler.set_state(0, j);
    sampler.get_samples(s.col(j));
  }
  return s;
}

/// Oracle: materializes S in counter mode and forms S A directly, accumulating
/// in ascending row order of A. Refuses d m above `cap`.
inline SketchResult sketch_explicit(const CscMatrix& a, const SketchConfig& cfg, double cap = kDefaultExplicitCap) {
  SKETCHSP_REQUIRE(cfg.d >= 1, ConfigError, "sketch size d must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();
  const DenseMatrix s = materialize_sketch_operator(cfg.d, a.nrows(), cfg.seed, cfg.dist, cap);
  const bool scaled = cfg.dist == Distribution::uniform_scaled;
  const double f = scaled ? scaled_sketch_factor() : 1.0;
  SketchResult res{DenseMatrix(cfg.d, a.ncols()), {}};
  for (index_t k = 0; k < a.ncols(); ++k) {
    auto out = res.ahat.col(k);
    for (index_t p = a.col_begin(k); p < a.col_end(k); ++p) {
      const double av = scaled ? a.values()[p] * f : a.values()[p];
      const auto sj = s.col(a.row_idx()[p]);
      for (index_t i = 0; i < cfg.d; ++i) out[i] += av * sj[i];
    }
  }
  res.stats.generated = static_cast<std::uint64_t>(cfg.d) * static_cast<std::uint64_t>(a.nrows());
  res.stats.compute_seconds = detail::seconds_since(t0);
  res.stats.workers = 1;
  return res;
}

/// Random values the engine will generate: d nnz(A) for kji; for jki, d times
/// the number of (block, row) pairs holding at least one entry.
inline std::uint64_t generation_count_estimate(const CscMatrix& a, const SketchConfig& cfg) {
  const auto d = static_cast<std::uint64_t>(cfg.d);
  if (cfg.variant == KernelVariant::kji) return d * static_cast<std::uint64_t>(a.nnz());
  const index_t bn = std::max<index_t>(1, std::min(cfg.block_n, a.ncols()));
  std::vector<index_t> stamp(static_cast<std::size_t>(a.nrows()), -1);
  std::uint64_t rows = 0;
  for (index_t c0 = 0; c0 < a.ncols(); c0 += bn) {
    const index_t c1 = std::min(a.ncols(), c0 + bn);
    for (index_t p = a.col_begin(c0); p < a.col_begin(c1); ++p) {
      auto& s = stamp[a.row_idx()[p]];
      if (s != c0) {
        s = c0;
        ++rows;
      }
    }
  }
  return d * rows;
}

}  // namespace sketchsp
