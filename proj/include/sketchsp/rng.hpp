#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sketchsp/error.hpp"

namespace sketchsp {

/// How the entries of the implied sketching matrix S are addressed.
///
/// counter:    S[i, j] is a pure function of (seed, i, j). Any blocking, kernel
///             or thread count reproduces the same S.
/// checkpoint: a xoshiro256** stream is reseeded at each (r, j) block start and
///             run sequentially from there, so S depends on where the row
///             blocks start (i.e. on b_d).
enum class GeneratorMode { counter, checkpoint };

/// Marginal distribution of the entries of S.
enum class Distribution {
  rademacher,      ///< +-1 with equal probability
  uniform,         ///< open interval (-1, 1), 32-bit resolution
  uniform_scaled,  ///< the integer behind `uniform`, scale 2^-31 folded into A
  gaussian,        ///< N(0, 1) via Box-Muller
};

inline constexpr std::string_view to_string(GeneratorMode m) {
  return m == GeneratorMode::counter ? "counter" : "checkpoint";
}

inline constexpr std::string_view to_string(Distribution d) {
  switch (d) {
    case Distribution::rademacher: return "rademacher";
    case Distribution::uniform: return "uniform";
    case Distribution::uniform_scaled: return "uniform-scaled";
    case Distribution::gaussian: return "gaussian";
  }
  return "?";
}

inline GeneratorMode parse_generator_mode(std::string_view s) {
  if (s == "counter") return GeneratorMode::counter;
  if (s == "checkpoint") return GeneratorMode::checkpoint;
  throw ConfigError("unknown generator mode '" + std::string(s) + "'");
}

inline Distribution parse_distribution(std::string_view s) {
  if (s == "rademacher") return Distribution::rademacher;
  if (s == "uniform") return Distribution::uniform;
  if (s == "uniform-scaled" || s == "uniform_scaled") return Distribution::uniform_scaled;
  if (s == "gaussian") return Distribution::gaussian;
  throw ConfigError("unknown distribution '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Philox4x64-10 (Salmon et al.), bit-compatible with Random123 and numpy.
// ---------------------------------------------------------------------------

using Philox4x64Counter = std::array<std::uint64_t, 4>;
using Philox4x64Key = std::array<std::uint64_t, 2>;

namespace detail {

inline constexpr std::uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ULL;
inline constexpr std::uint64_t kPhiloxM1 = 0xCA5A826395121157ULL;
inline constexpr std::uint64_t kPhiloxW0 = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kPhiloxW1 = 0xBB67AE8584CAA73BULL;

inline constexpr void mulhilo64(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

inline constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

template <int Rounds = 10>
constexpr Philox4x64Counter philox4x64(Philox4x64Counter ctr, Philox4x64Key key) {
  for (int r = 0; r < Rounds; ++r) {
    if (r > 0) {
      key[0] += detail::kPhiloxW0;
      key[1] += detail::kPhiloxW1;
    }
    std::uint64_t hi0, lo0, hi1, lo1;
    detail::mulhilo64(detail::kPhiloxM0, ctr[0], hi0, lo0);
    detail::mulhilo64(detail::kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

/// Counter-mode primitive: the 64-bit word behind S[i, j].
///
/// Philox4x64-10 keyed by (seed, j); entry i is lane i % 4 of the block at
/// counter (i / 4, 0, 0, 0). Frozen vectors live in tests/data.
constexpr std::uint64_t raw_word(std::uint64_t seed, std::uint64_t i, std::uint64_t j) {
  return philox4x64({i >> 2, 0, 0, 0}, {seed, j})[i & 3];
}

// ---------------------------------------------------------------------------
// xoshiro256** (Blackman & Vigna)
// ---------------------------------------------------------------------------

class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  static constexpr std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  constexpr Xoshiro256() : Xoshiro256(0) {}
  constexpr explicit Xoshiro256(std::uint64_t seed) noexcept {
    for (auto& s : s_) s = splitmix64(seed);
  }
  constexpr explicit Xoshiro256(const std::array<std::uint64_t, 4>& state) noexcept : s_(state) {
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x9E3779B97F4A7C15ULL;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  constexpr result_type operator()() noexcept {
    const std::uint64_t result = detail::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in the open interval (0, 1), 53-bit resolution.
  double uniform01() noexcept {
    for (;;) {
      const double u = static_cast<double>((*this)() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  /// Uniform double in (-1, 1), never exactly 0.
  double uniform_pm1() noexcept {
    for (;;) {
      const double u = 2.0 * uniform01() - 1.0;
      if (u != 0.0) return u;
    }
  }

  /// Standard normal via Box-Muller (one output per call).
  double normal() noexcept {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  const std::array<std::uint64_t, 4>& state() const noexcept { return s_; }

 private:
  std::array<std::uint64_t, 4> s_{};
};

// ---------------------------------------------------------------------------
// Word -> value mappings
// ---------------------------------------------------------------------------

/// The deferred scale factor f = 2^-31: sketching with integer-valued S
/// against A * f equals sketching with S * f against A.
constexpr double scaled_sketch_factor() { return 0x1.0p-31; }

namespace detail {

// Signed 32-bit integer in (-2^31, 2^31); -2^31 is folded onto 0 so that the
// scaled value stays strictly inside (-1, 1).
inline constexpr std::int32_t signed_high32(std::uint64_t w) {
  const auto x = static_cast<std::int32_t>(static_cast<std::uint32_t>(w >> 32));
  return x == INT32_MIN ? 0 : x;
}
inline constexpr std::int32_t signed_low32(std::uint64_t w) {
  const auto x = static_cast<std::int32_t>(static_cast<std::uint32_t>(w));
  return x == INT32_MIN ? 0 : x;
}

}  // namespace detail

inline double map_word(std::uint64_t w, Distribution dist) {
  switch (dist) {
    case Distribution::rademacher:
      return (w >> 63) ? -1.0 : 1.0;
    case Distribution::uniform:
      return static_cast<double>(detail::signed_high32(w)) * scaled_sketch_factor();
    case Distribution::uniform_scaled:
      return static_cast<double>(detail::signed_high32(w));
    case Distribution::gaussian: {
      const double v1 = static_cast<double>(detail::signed_high32(w)) * scaled_sketch_factor();
      const double v2 = static_cast<double>(detail::signed_low32(w)) * scaled_sketch_factor();
      const double u1 = 0.5 * (1.0 + v1);  // (0, 1)
      return std::sqrt(-2.0 * std::log(u1)) * std::cos(std::numbers::pi * v2);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// SketchSampler
// ---------------------------------------------------------------------------

/// Seekable source of the entries of one column of S.
///
/// After `set_state(r, j)` the next `get_samples` call yields S[r, j],
/// S[r + 1, j], ... . Not thread-safe; each worker owns one.
class SketchSampler {
 public:
  SketchSampler(std::uint64_t seed, GeneratorMode mode, Distribution dist)
      : seed_(seed), mode_(mode), dist_(dist) {}

  void set_state(std::int64_t r, std::int64_t j) {
    row_ = static_cast<std::uint64_t>(r);
    col_ = static_cast<std::uint64_t>(j);
    positioned_ = true;
    if (mode_ == GeneratorMode::counter) {
      cached_block_ = ~std::uint64_t{0};
    } else {
      // One Philox application keyed like counter mode, but with lane 1 of the
      // counter set so checkpoint states never coincide with counter blocks.
      const auto st = philox4x64({row_, 1, 0, 0}, {seed_, col_});
      xoshiro_ = Xoshiro256({st[0], st[1], st[2], st[3]});
      for (int k = 0; k < kWarmup; ++k) xoshiro_();
    }
  }

  void get_samples(std::span<double> out) {
    SKETCHSP_REQUIRE(positioned_, ConfigError, "get_samples called before set_state");
    std::chrono::steady_clock::time_point t0;
    if (timing_) t0 = std::chrono::steady_clock::now();
    switch (dist_) {
      case Distribution::rademacher: fill<Distribution::rademacher>(out); break;
      case Distribution::uniform: fill<Distribution::uniform>(out); break;
      case Distribution::uniform_scaled: fill<Distribution::uniform_scaled>(out); break;
      case Distribution::gaussian: fill<Distribution::gaussian>(out); break;
    }
    generated_ += out.size();
    if (timing_) sample_seconds_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  std::vector<double> get_samples(std::size_t len) {
    std::vector<double> v(len);
    get_samples(std::span<double>(v));
    return v;
  }

  /// Total number of values produced since construction.
  std::uint64_t generated() const noexcept { return generated_; }

  /// Accumulates wall time spent inside get_samples. Off by default since the
  /// clock reads perturb the totals being measured.
  void enable_timing(bool on) noexcept { timing_ = on; }
  double sample_seconds() const noexcept { return sample_seconds_; }

  std::uint64_t seed() const noexcept { return seed_; }
  GeneratorMode mode() const noexcept { return mode_; }
  Distribution distribution() const noexcept { return dist_; }

  static constexpr int kWarmup = 4;

 private:
  std::uint64_t next_word() {
    if (mode_ == GeneratorMode::checkpoint) return xoshiro_();
    const std::uint64_t block = row_ >> 2;
    if (block != cached_block_) {
      cache_ = philox4x64({block, 0, 0, 0}, {seed_, col_});
      cached_block_ = block;
    }
    return cache_[row_++ & 3];
  }

  template <Distribution D>
  void fill(std::span<double> out) {
    for (auto& x : out) x = map_word(next_word(), D);
  }

  std::uint64_t seed_;
  GeneratorMode mode_;
  Distribution dist_;
  bool positioned_ = false;
  bool timing_ = false;
  std::uint64_t row_ = 0;
  std::uint64_t col_ = 0;
  std::uint64_t cached_block_ = ~std::uint64_t{0};
  Philox4x64Counter cache_{};
  Xoshiro256 xoshiro_;
  std::uint64_t generated_ = 0;
  double sample_seconds_ = 0.0;
};

}  // namespace sketchsp
