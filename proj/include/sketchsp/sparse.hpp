#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "sketchsp/dense.hpp"
#include "sketchsp/error.hpp"

namespace sketchsp {

/// One stored entry (row, column, value), 0-based.
struct Entry {
  index_t row;
  index_t col;
  double value;
  auto operator<=>(const Entry&) const = default;
};

/// Compressed sparse column matrix.
///
/// Canonical form: row indices strictly increasing within each column, no
/// explicitly stored zeros. Every constructor except `from_parts_unchecked`
/// produces canonical form; `validate()` checks it.
class CscMatrix {
 public:
  CscMatrix() : col_ptr_(1, 0) {}

  /// Builds the canonical matrix from arbitrary coordinate entries.
  /// Duplicates are summed; entries summing to zero are dropped.
  static CscMatrix from_entries(index_t nrows, index_t ncols, std::vector<Entry> entries) {
    SKETCHSP_REQUIRE(nrows >= 0 && ncols >= 0, ConfigError, "negative sparse dimensions");
    for (const auto& e : entries) {
      SKETCHSP_REQUIRE(e.row >= 0 && e.row < nrows && e.col >= 0 && e.col < ncols, ConfigError,
                       "entry (" + std::to_string(e.row) + ", " + std::to_string(e.col) +
                           ") outside " + std::to_string(nrows) + "x" + std::to_string(ncols));
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      return std::tie(a.col, a.row) < std::tie(b.col, b.row);
    });
    CscMatrix out;
    out.nrows_ = nrows;
    out.ncols_ = ncols;
    out.col_ptr_.assign(static_cast<std::size_t>(ncols + 1), 0);
    out.row_idx_.reserve(entries.size());
    out.values_.reserve(entries.size());
    std::size_t p = 0;
    while (p < entries.size()) {
      const index_t r = entries[p].row, c = entries[p].col;
      double sum = 0.0;
      for (; p < entries.size() && entries[p].row == r && entries[p].col == c; ++p) sum += entries[p].value;
      if (sum == 0.0) continue;
      out.row_idx_.push_back(r);
      out.values_.push_back(sum);
      ++out.col_ptr_[static_cast<std::size_t>(c + 1)];
    }
    for (index_t k = 0; k < ncols; ++k) out.col_ptr_[k + 1] += out.col_ptr_[k];
    return out;
  }

  /// Adopts raw CSC arrays and validates them.
  static CscMatrix from_parts(index_t nrows, index_t ncols, std::vector<index_t> col_ptr,
                              std::vector<index_t> row_idx, std::vector<double> values) {
    CscMatrix out = from_parts_unchecked(nrows, ncols, std::move(col_ptr), std::move(row_idx), std::move(values));
    if (auto msg = out.check(); !msg.empty()) throw ConfigError("invalid CSC arrays: " + msg);
    return out;
  }

  static CscMatrix from_parts_unchecked(index_t nrows, index_t ncols, std::vector<index_t> col_ptr,
                                        std::vector<index_t> row_idx, std::vector<double> values) {
    CscMatrix out;
    out.nrows_ = nrows;
    out.ncols_ = ncols;
    out.col_ptr_ = std::move(col_ptr);
    out.row_idx_ = std::move(row_idx);
    out.values_ = std::move(values);
    return out;
  }

  static CscMatrix identity(index_t n) {
    std::vector<index_t> cp(static_cast<std::size_t>(n + 1)), ri(static_cast<std::size_t>(n));
    for (index_t k = 0; k <= n; ++k) cp[k] = k;
    for (index_t k = 0; k < n; ++k) ri[k] = k;
    return from_parts_unchecked(n, n, std::move(cp), std::move(ri), std::vector<double>(static_cast<std::size_t>(n), 1.0));
  }

  static CscMatrix from_dense(const DenseMatrix& a) {
    std::vector<Entry> e;
    for (index_t k = 0; k < a.ncols(); ++k)
      for (index_t i = 0; i < a.nrows(); ++i)
        if (a(i, k) != 0.0) e.push_back({i, k, a(i, k)});
    return from_entries(a.nrows(), a.ncols(), std::move(e));
  }

  index_t nrows() const noexcept { return nrows_; }
  index_t ncols() const noexcept { return ncols_; }
  index_t nnz() const noexcept { return static_cast<index_t>(values_.size()); }

  std::span<const index_t> col_ptr() const noexcept { return col_ptr_; }
  std::span<const index_t> row_idx() const noexcept { return row_idx_; }
  std::span<const double> values() const noexcept { return values_; }

  index_t col_begin(index_t k) const noexcept { return col_ptr_[static_cast<std::size_t>(k)]; }
  index_t col_end(index_t k) const noexcept { return col_ptr_[static_cast<std::size_t>(k + 1)]; }

  /// Returns an empty string when the structural invariants hold, otherwise a
  /// description of the first violation.
  std::string check() const {
    if (nrows_ < 0 || ncols_ < 0) return "negative dimensions";
    if (col_ptr_.size() != static_cast<std::size_t>(ncols_ + 1)) return "col_ptr length != ncols + 1";
    if (col_ptr_.front() != 0) return "col_ptr[0] != 0";
    if (row_idx_.size() != values_.size()) return "row_idx and values lengths differ";
    if (col_ptr_.back() != nnz()) return "col_ptr[n] != nnz";
    for (index_t k = 0; k < ncols_; ++k) {
      if (col_end(k) < col_begin(k)) return "col_ptr decreases at column " + std::to_string(k);
      for (index_t p = col_begin(k); p < col_end(k); ++p) {
        if (row_idx_[p] < 0 || row_idx_[p] >= nrows_) return "row index out of range in column " + std::to_string(k);
        if (p > col_begin(k) && row_idx_[p] <= row_idx_[p - 1])
          return "row indices not strictly increasing in column " + std::to_string(k);
        if (values_[p] == 0.0) return "explicit zero in column " + std::to_string(k);
      }
    }
    return {};
  }
  bool valid() const { return check().empty(); }
  void validate() const {
    if (auto msg = check(); !msg.empty()) throw ConfigError("invalid CSC matrix: " + msg);
  }

  std::vector<Entry> entries() const {
    std::vector<Entry> out;
    out.reserve(values_.size());
    for (index_t k = 0; k < ncols_; ++k)
      for (index_t p = col_begin(k); p < col_end(k); ++p) out.push_back({row_idx_[p], k, values_[p]});
    return out;
  }

  DenseMatrix to_dense() const {
    DenseMatrix d(nrows_, ncols_);
    for (index_t k = 0; k < ncols_; ++k)
      for (index_t p = col_begin(k); p < col_end(k); ++p) d(row_idx_[p], k) = values_[p];
    return d;
  }

  /// Copy with every value multiplied by `factor` (exact for powers of two).
  CscMatrix scaled(double factor) const {
    CscMatrix out = *this;
    for (auto& v : out.values_) v *= factor;
    return out;
  }

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (index_t k = 0; k < ncols_; ++k) {
      const double xk = x[k];
      if (xk == 0.0) continue;
      for (index_t p = col_begin(k); p < col_end(k); ++p) y[row_idx_[p]] += values_[p] * xk;
    }
  }

  /// y = A^T x
  void multiply_transpose(std::span<const double> x, std::span<double> y) const {
    for (index_t k = 0; k < ncols_; ++k) {
      double s = 0.0;
      for (index_t p = col_begin(k); p < col_end(k); ++p) s += values_[p] * x[row_idx_[p]];
      y[k] = s;
    }
  }

  double column_norm(index_t k) const {
    double s = 0.0;
    for (index_t p = col_begin(k); p < col_end(k); ++p) s += values_[p] * values_[p];
    return std::sqrt(s);
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
  }

  bool operator==(const CscMatrix&) const = default;

 private:
  index_t nrows_ = 0;
  index_t ncols_ = 0;
  std::vector<index_t> col_ptr_;
  std::vector<index_t> row_idx_;
  std::vector<double> values_;
};

/// nnz / (m n); 0 for a matrix with no cells.
inline double density(const CscMatrix& a) {
  const double cells = static_cast<double>(a.nrows()) * static_cast<double>(a.ncols());
  return cells == 0.0 ? 0.0 : static_cast<double>(a.nnz()) / cells;
}

inline CscMatrix transpose(const CscMatrix& a) {
  std::vector<index_t> cp(static_cast<std::size_t>(a.nrows() + 1), 0);
  for (index_t r : a.row_idx()) ++cp[r + 1];
  for (index_t i = 0; i < a.nrows(); ++i) cp[i + 1] += cp[i];
  std::vector<index_t> ri(static_cast<std::size_t>(a.nnz()));
  std::vector<double> v(static_cast<std::size_t>(a.nnz()));
  std::vector<index_t> next(cp.begin(), cp.end() - 1);
  for (index_t k = 0; k < a.ncols(); ++k) {
    for (index_t p = a.col_begin(k); p < a.col_end(k); ++p) {
      const index_t dst = next[a.row_idx()[p]]++;
      ri[dst] = k;
      v[dst] = a.values()[p];
    }
  }
  return CscMatrix::from_parts_unchecked(a.ncols(), a.nrows(), std::move(cp), std::move(ri), std::move(v));
}

/// Removes rows and columns without stored entries. Relative order of the
/// remaining rows and columns is kept.
inline CscMatrix drop_empty(const CscMatrix& a) {
  std::vector<index_t> row_map(static_cast<std::size_t>(a.nrows()), -1);
  for (index_t r : a.row_idx()) row_map[r] = 0;
  index_t m = 0;
  for (auto& r : row_map)
    if (r == 0) r = m++;
  std::vector<index_t> cp{0}, ri;
  std::vector<double> v;
  ri.reserve(static_cast<std::size_t>(a.nnz()));
  v.reserve(static_cast<std::size_t>(a.nnz()));
  for (index_t k = 0; k < a.ncols(); ++k) {
    if (a.col_end(k) == a.col_begin(k)) continue;
    for (index_t p = a.col_begin(k); p < a.col_end(k); ++p) {
      ri.push_back(row_map[a.row_idx()[p]]);
      v.push_back(a.values()[p]);
    }
    cp.push_back(static_cast<index_t>(ri.size()));
  }
  const auto n = static_cast<index_t>(cp.size() - 1);
  return CscMatrix::from_parts_unchecked(m, n, std::move(cp), std::move(ri), std::move(v));
}

/// One vertical block of a BlockedCsrMatrix, stored row-major sparse.
struct CsrBlock {
  index_t col_begin = 0;            ///< first global column covered by the block
  index_t width = 0;                ///< number of columns in the block
  std::vector<index_t> row_ptr;     ///< m + 1 offsets
  std::vector<index_t> col_idx;     ///< local column in [0, width)
  std::vector<double> values;
  index_t nonzero_rows = 0;         ///< rows holding at least one entry

  index_t nnz() const noexcept { return static_cast<index_t>(values.size()); }
};

/// A partitioned into ceil(n / block_width) vertical blocks, each in CSR.
struct BlockedCsrMatrix {
  index_t nrows = 0;
  index_t ncols = 0;
  index_t block_width = 1;
  std::vector<CsrBlock> blocks;

  std::vector<Entry> entries() const {
    std::vector<Entry> out;
    for (const auto& b : blocks)
      for (index_t r = 0; r < nrows; ++r)
        for (index_t p = b.row_ptr[r]; p < b.row_ptr[r + 1]; ++p)
          out.push_back({r, b.col_begin + b.col_idx[p], b.values[p]});
    return out;
  }
};

namespace detail {

inline CsrBlock transpose_block(const CscMatrix& a, index_t c0, index_t c1, std::vector<index_t>& counts) {
  CsrBlock blk;
  blk.col_begin = c0;
  blk.width = c1 - c0;
  const index_t m = a.nrows();
  counts.assign(static_cast<std::size_t>(m), 0);
  for (index_t p = a.col_begin(c0); p < a.col_begin(c1); ++p) ++counts[a.row_idx()[p]];
  blk.row_ptr.assign(static_cast<std::size_t>(m + 1), 0);
  for (index_t r = 0; r < m; ++r) {
    blk.row_ptr[r + 1] = blk.row_ptr[r] + counts[r];
    if (counts[r] != 0) ++blk.nonzero_rows;
  }
  const index_t nz = blk.row_ptr[m];
  blk.col_idx.resize(static_cast<std::size_t>(nz));
  blk.values.resize(static_cast<std::size_t>(nz));
  // Reuse counts as the insertion cursor; columns are visited in ascending
  // order, so local column indices come out sorted within each row.
  for (index_t r = 0; r < m; ++r) counts[r] = blk.row_ptr[r];
  for (index_t k = c0; k < c1; ++k) {
    for (index_t p = a.col_begin(k); p < a.col_end(k); ++p) {
      const index_t dst = counts[a.row_idx()[p]]++;
      blk.col_idx[dst] = k - c0;
      blk.values[dst] = a.values()[p];
    }
  }
  return blk;
}

}  // namespace detail

/// Splits the columns of `a` into blocks of `block_width` and transposes each
/// block into CSR. Cost O(ceil(n / b_n) m + nnz). Blocks are independent, so
/// with `threads > 1` they are built concurrently; the result does not depend
/// on the thread count.
inline BlockedCsrMatrix to_blocked_csr(const CscMatrix& a, index_t block_width, int threads = 1) {
  SKETCHSP_REQUIRE(block_width >= 1, ConfigError, "block width must be >= 1");
  BlockedCsrMatrix out;
  out.nrows = a.nrows();
  out.ncols = a.ncols();
  out.block_width = block_width;
  const index_t nblocks = (a.ncols() + block_width - 1) / block_width;
  out.blocks.resize(static_cast<std::size_t>(nblocks));

  std::atomic<index_t> next{0};
  auto worker = [&] {
    std::vector<index_t> counts;
    for (index_t b = next++; b < nblocks; b = next++) {
      const index_t c0 = b * block_width;
      const index_t c1 = std::min(a.ncols(), c0 + block_width);
      out.blocks[b] = detail::transpose_block(a, c0, c1, counts);
    }
  };
  const int nworkers = static_cast<int>(std::clamp<index_t>(threads, 1, std::max<index_t>(nblocks, 1)));
  if (nworkers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < nworkers; ++t) pool.emplace_back(worker);
  }
  return out;
}

}  // namespace sketchsp
