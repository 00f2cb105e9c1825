#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "sketchsp/dense.hpp"
#include "sketchsp/error.hpp"
#include "sketchsp/matrix_market.hpp"

namespace sketchsp {

// Raw dense export: a 16-byte header followed by nrows * ncols IEEE-754
// doubles in column-major order, all little-endian.
//
//   bytes 0..7    magic "SKAHAT01"
//   bytes 8..11   uint32 nrows
//   bytes 12..15  uint32 ncols
inline constexpr std::array<char, 8> kDenseBinaryMagic{'S', 'K', 'A', 'H', 'A', 'T', '0', '1'};

namespace detail {

template <typename T>
void put_le(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw ParseError(0, "truncated binary matrix");
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace detail

inline void write_dense_binary(std::ostream& out, const DenseMatrix& a) {
  SKETCHSP_REQUIRE(a.nrows() <= std::numeric_limits<std::uint32_t>::max() &&
                       a.ncols() <= std::numeric_limits<std::uint32_t>::max(),
                   ConfigError, "matrix too large for the binary header");
  out.write(kDenseBinaryMagic.data(), kDenseBinaryMagic.size());
  detail::put_le(out, static_cast<std::uint32_t>(a.nrows()));
  detail::put_le(out, static_cast<std::uint32_t>(a.ncols()));
  for (double v : a.values()) detail::put_le(out, v);
}

inline DenseMatrix read_dense_binary(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kDenseBinaryMagic)
    throw ParseError(0, "bad magic in binary matrix");
  const auto m = detail::get_le<std::uint32_t>(in);
  const auto n = detail::get_le<std::uint32_t>(in);
  DenseMatrix out(m, n);
  for (auto& v : out.values()) v = detail::get_le<double>(in);
  return out;
}

enum class DenseFormat { matrix_market, binary };

inline DenseFormat parse_dense_format(std::string_view s) {
  if (s == "mtx" || s == "matrix-market") return DenseFormat::matrix_market;
  if (s == "bin" || s == "binary") return DenseFormat::binary;
  throw ConfigError("unknown dense format '" + std::string(s) + "'");
}

inline void write_dense(std::ostream& out, const DenseMatrix& a, DenseFormat fmt) {
  if (fmt == DenseFormat::binary) {
    write_dense_binary(out, a);
  } else {
    write_dense_matrix_market(out, a);
  }
}

inline void write_dense(const std::string& path, const DenseMatrix& a, DenseFormat fmt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_dense(out, a, fmt);
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace sketchsp
