#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sketchsp/dense.hpp"
#include "sketchsp/error.hpp"
#include "sketchsp/sparse.hpp"

namespace sketchsp {

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view tok, std::size_t line, const char* what) {
  T value{};
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw ParseError(line, std::string("non-numeric ") + what + " '" + std::string(tok) + "'");
  return value;
}

/// Shortest decimal string that reads back to exactly `v`.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct MmHeader {
  bool coordinate = true;
  std::string field;     // real | integer | pattern
  std::string symmetry;  // general | symmetric
};

inline MmHeader parse_header(const std::string& line) {
  auto tok = split_ws(line);
  if (tok.size() != 5 || lower(tok[0]) != "%%matrixmarket" || lower(tok[1]) != "matrix")
    throw ParseError(1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'");
  MmHeader h;
  const auto format = lower(tok[2]);
  if (format == "coordinate") {
    h.coordinate = true;
  } else if (format == "array") {
    h.coordinate = false;
  } else {
    throw ParseError(1, "unsupported format '" + std::string(tok[2]) + "'");
  }
  h.field = lower(tok[3]);
  if (h.field != "real" && h.field != "integer" && h.field != "pattern")
    throw ParseError(1, "unsupported field '" + std::string(tok[3]) + "'");
  h.symmetry = lower(tok[4]);
  if (h.symmetry != "general" && h.symmetry != "symmetric")
    throw ParseError(1, "unsupported symmetry '" + std::string(tok[4]) + "'");
  return h;
}

// Reads the next non-comment, non-blank line; returns false at EOF.
inline bool next_data_line(std::istream& in, std::string& line, std::size_t& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    return true;
  }
  return false;
}

}  // namespace detail

/// Reads a Matrix Market coordinate file (real, integer or pattern; general or
/// symmetric) into canonical CSC. Indices are converted from 1-based.
inline CscMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError(0, "empty input");
  const auto hdr = detail::parse_header(line);
  if (!hdr.coordinate) throw ParseError(1, "expected coordinate format for a sparse matrix");

  if (!detail::next_data_line(in, line, lineno)) throw ParseError(lineno, "missing size line");
  auto size_tok = detail::split_ws(line);
  if (size_tok.size() != 3) throw ParseError(lineno, "size line must hold 'rows cols entries'");
  const auto m = detail::parse_number<index_t>(size_tok[0], lineno, "row count");
  const auto n = detail::parse_number<index_t>(size_tok[1], lineno, "column count");
  const auto declared = detail::parse_number<index_t>(size_tok[2], lineno, "entry count");
  if (m < 0 || n < 0 || declared < 0) throw ParseError(lineno, "negative size");
  const bool symmetric = hdr.symmetry == "symmetric";
  if (symmetric && m != n) throw ParseError(lineno, "symmetric matrix must be square");

  const bool pattern = hdr.field == "pattern";
  const std::size_t want_tokens = pattern ? 2 : 3;
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(symmetric ? 2 * declared : declared));
  index_t seen = 0;
  while (detail::next_data_line(in, line, lineno)) {
    if (seen == declared) throw ParseError(lineno, "more entries than declared");
    auto tok = detail::split_ws(line);
    if (tok.size() != want_tokens) throw ParseError(lineno, "expected " + std::to_string(want_tokens) + " fields");
    const auto i = detail::parse_number<index_t>(tok[0], lineno, "row index");
    const auto j = detail::parse_number<index_t>(tok[1], lineno, "column index");
    if (i < 1 || i > m || j < 1 || j > n)
      throw ParseError(lineno, "index (" + std::to_string(i) + ", " + std::to_string(j) + ") outside declared " +
                                   std::to_string(m) + "x" + std::to_string(n));
    double v = 1.0;
    if (!pattern) v = detail::parse_number<double>(tok[2], lineno, "value");
    entries.push_back({i - 1, j - 1, v});
    if (symmetric && i != j) entries.push_back({j - 1, i - 1, v});
    ++seen;
  }
  if (seen != declared)
    throw ParseError(lineno, "declared " + std::to_string(declared) + " entries, found " + std::to_string(seen));
  return CscMatrix::from_entries(m, n, std::move(entries));
}

inline CscMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_matrix_market(in);
}

/// Writes `%%MatrixMarket matrix coordinate real general`, 1-based indices,
/// entries in column-major order, values in shortest round-trip form.
inline void write_matrix_market(std::ostream& out, const CscMatrix& a) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.nrows() << ' ' << a.ncols() << ' ' << a.nnz() << '\n';
  for (index_t k = 0; k < a.ncols(); ++k)
    for (index_t p = a.col_begin(k); p < a.col_end(k); ++p)
      out << a.row_idx()[p] + 1 << ' ' << k + 1 << ' ' << detail::format_double(a.values()[p]) << '\n';
}

inline void write_matrix_market(const std::string& path, const CscMatrix& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_matrix_market(out, a);
  if (!out) throw Error("write to '" + path + "' failed");
}

/// Dense export in Matrix Market array format (column-major values).
inline void write_dense_matrix_market(std::ostream& out, const DenseMatrix& a) {
  out << "%%MatrixMarket matrix array real general\n";
  out << a.nrows() << ' ' << a.ncols() << '\n';
  for (double v : a.values()) out << detail::format_double(v) << '\n';
}

inline DenseMatrix read_dense_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError(0, "empty input");
  const auto hdr = detail::parse_header(line);
  if (hdr.coordinate || hdr.field == "pattern" || hdr.symmetry != "general")
    throw ParseError(1, "expected 'array real general'");
  if (!detail::next_data_line(in, line, lineno)) throw ParseError(lineno, "missing size line");
  auto tok = detail::split_ws(line);
  if (tok.size() != 2) throw ParseError(lineno, "size line must hold 'rows cols'");
  const auto m = detail::parse_number<index_t>(tok[0], lineno, "row count");
  const auto n = detail::parse_number<index_t>(tok[1], lineno, "column count");
  if (m < 0 || n < 0) throw ParseError(lineno, "negative size");
  DenseMatrix out(m, n);
  std::size_t k = 0;
  while (detail::next_data_line(in, line, lineno)) {
    if (k == out.values().size()) throw ParseError(lineno, "more values than declared");
    auto vt = detail::split_ws(line);
    if (vt.size() != 1) throw ParseError(lineno, "expected one value per line");
    out.values()[k++] = detail::parse_number<double>(vt[0], lineno, "value");
  }
  if (k != out.values().size()) throw ParseError(lineno, "fewer values than declared");
  return out;
}

}  // namespace sketchsp
