#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "sketchsp/error.hpp"
#include "sketchsp/sketch.hpp"
#include "sketchsp/sparse.hpp"

namespace sketchsp {

struct BenchConfig {
  KernelVariant variant = KernelVariant::kji;
  Distribution dist = Distribution::uniform;
  GeneratorMode mode = GeneratorMode::counter;
  index_t block_n = kDefaultBlockN;
  index_t block_d = kDefaultBlockD;

  std::string id() const {
    return std::string(to_string(variant)) + "/" + std::string(to_string(dist)) + "/" + std::string(to_string(mode)) +
           "/bn" + std::to_string(block_n) + "/bd" + std::to_string(block_d);
  }
};

inline const std::vector<int> kDefaultBenchThreads{1, 2, 4, 8, 16, 32};

struct BenchSpec {
  index_t d = 1;
  std::vector<BenchConfig> configs;
  std::vector<int> threads = kDefaultBenchThreads;
  int repetitions = 3;
  int warmup = 1;
  std::uint64_t seed = 0;
  bool time_sampling = false;

  void validate() const {
    SKETCHSP_REQUIRE(d >= 1, ConfigError, "d must be >= 1");
    SKETCHSP_REQUIRE(repetitions >= 1, ConfigError, "repetitions must be >= 1");
    SKETCHSP_REQUIRE(warmup >= 0, ConfigError, "warmup must be >= 0");
    SKETCHSP_REQUIRE(!configs.empty(), ConfigError, "no benchmark configurations");
    SKETCHSP_REQUIRE(!threads.empty(), ConfigError, "no thread counts");
    for (int t : threads) SKETCHSP_REQUIRE(t >= 1, ConfigError, "thread counts must be >= 1");
  }
};

struct BenchRow {
  std::string config_id;
  BenchConfig config;
  int threads = 1;
  index_t d = 0;
  index_t nnz = 0;
  bool failed = false;
  std::string error;
  double total_seconds = 0.0;       ///< median wall time of one sketch() call
  double sample_seconds = 0.0;      ///< median RNG time per worker; 0 without timing
  double conversion_seconds = 0.0;  ///< median CSC -> blocked CSR time; 0 for kji
  double gflops = 0.0;              ///< 2 nnz d / total_seconds / 1e9
  std::uint64_t generated = 0;
  double speedup = 0.0;             ///< against the smallest thread count of the same config
  double efficiency = 0.0;          ///< speedup / (threads / smallest thread count)
};

inline constexpr double kMinBenchSeconds = 1e-9;

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

}  // namespace detail

/// Times every configuration at every thread count. A configuration that
/// throws is reported with failed = true and the remaining rows still run.
inline std::vector<BenchRow> run_bench(const CscMatrix& a, const BenchSpec& spec) {
  spec.validate();
  std::vector<int> threads = spec.threads;
  std::sort(threads.begin(), threads.end());
  threads.erase(std::unique(threads.begin(), threads.end()), threads.end());

  std::vector<BenchRow> rows;
  for (const auto& c : spec.configs) {
    const std::size_t first = rows.size();
    for (int t : threads) {
      BenchRow row;
      row.config_id = c.id();
      row.config = c;
      row.threads = t;
      row.d = spec.d;
      row.nnz = a.nnz();
      SketchConfig cfg{spec.d, c.block_n, c.block_d, c.variant, c.dist, c.mode, spec.seed, t, spec.time_sampling};
      try {
        for (int w = 0; w < spec.warmup; ++w) (void)sketch(a, cfg);
        std::vector<double> total, sample, conv;
        for (int rep = 0; rep < spec.repetitions; ++rep) {
          const auto t0 = std::chrono::steady_clock::now();
          const auto res = sketch(a, cfg);
          total.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
          sample.push_back(res.stats.sample_seconds);
          conv.push_back(res.stats.conversion_seconds);
          row.generated = res.stats.generated;
        }
        row.total_seconds = std::max(kMinBenchSeconds, detail::median(total));
        row.sample_seconds = std::min(row.total_seconds, detail::median(sample));
        row.conversion_seconds = detail::median(conv);
        if (c.variant == KernelVariant::jki) row.conversion_seconds = std::max(kMinBenchSeconds, row.conversion_seconds);
        row.gflops = 2.0 * static_cast<double>(row.nnz) * static_cast<double>(row.d) / row.total_seconds / 1e9;
      } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
    const BenchRow& base = rows[first];
    for (std::size_t i = first; i < rows.size(); ++i) {
      if (rows[i].failed || base.failed) continue;
      rows[i].speedup = base.total_seconds / rows[i].total_seconds;
      rows[i].efficiency = rows[i].speedup * base.threads / rows[i].threads;
    }
  }
  return rows;
}

inline const std::vector<std::string_view> kBenchCsvColumns{
    "config_id", "variant",  "dist",   "mode",      "block_n",    "block_d",       "threads",
    "d",         "nnz",      "failed", "total_seconds", "sample_seconds", "conversion_seconds", "gflops",
    "generated", "speedup",  "efficiency", "error"};

namespace detail {

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

inline std::string csv_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace detail

/// RFC-4180 CSV with a header row and CRLF line breaks.
inline void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  for (std::size_t i = 0; i < kBenchCsvColumns.size(); ++i) out << (i ? "," : "") << kBenchCsvColumns[i];
  out << "\r\n";
  for (const auto& r : rows) {
    using detail::csv_field, detail::csv_number;
    const std::vector<std::string> f{csv_field(r.config_id),
                                     std::string(to_string(r.config.variant)),
                                     std::string(to_string(r.config.dist)),
                                     std::string(to_string(r.config.mode)),
                                     std::to_string(r.config.block_n),
                                     std::to_string(r.config.block_d),
                                     std::to_string(r.threads),
                                     std::to_string(r.d),
                                     std::to_string(r.nnz),
                                     r.failed ? "true" : "false",
                                     csv_number(r.total_seconds),
                                     csv_number(r.sample_seconds),
                                     csv_number(r.conversion_seconds),
                                     csv_number(r.gflops),
                                     std::to_string(r.generated),
                                     csv_number(r.speedup),
                                     csv_number(r.efficiency),
                                     csv_field(r.error)};
    for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << f[i];
    out << "\r\n";
  }
}

}  // namespace sketchsp
