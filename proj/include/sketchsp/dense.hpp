#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sketchsp/error.hpp"

namespace sketchsp {

using index_t = std::int64_t;

/// Column-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(index_t nrows, index_t ncols, double fill = 0.0)
      : nrows_(nrows), ncols_(ncols) {
    SKETCHSP_REQUIRE(nrows >= 0 && ncols >= 0, ConfigError, "negative dense dimensions");
    values_.assign(static_cast<std::size_t>(nrows * ncols), fill);
  }

  index_t nrows() const noexcept { return nrows_; }
  index_t ncols() const noexcept { return ncols_; }

  double& operator()(index_t i, index_t j) { return values_[static_cast<std::size_t>(i + j * nrows_)]; }
  double operator()(index_t i, index_t j) const { return values_[static_cast<std::size_t>(i + j * nrows_)]; }

  std::span<double> col(index_t j) {
    return {values_.data() + j * nrows_, static_cast<std::size_t>(nrows_)};
  }
  std::span<const double> col(index_t j) const {
    return {values_.data() + j * nrows_, static_cast<std::size_t>(nrows_)};
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  Eigen::Map<Eigen::MatrixXd> eigen() { return {values_.data(), nrows_, ncols_}; }
  Eigen::Map<const Eigen::MatrixXd> eigen() const { return {values_.data(), nrows_, ncols_}; }

  bool operator==(const DenseMatrix&) const = default;

 private:
  index_t nrows_ = 0;
  index_t ncols_ = 0;
  std::vector<double> values_;
};

/// Non-owning view of a rectangular sub-block of a column-major matrix.
struct DenseView {
  double* data = nullptr;
  index_t nrows = 0;
  index_t ncols = 0;
  index_t ld = 0;

  double* col(index_t j) const noexcept { return data + j * ld; }

  static DenseView block(DenseMatrix& m, index_t row0, index_t col0, index_t nrows, index_t ncols) {
    return {m.data() + row0 + col0 * m.nrows(), nrows, ncols, m.nrows()};
  }
  static DenseView whole(DenseMatrix& m) { return {m.data(), m.nrows(), m.ncols(), m.nrows()}; }
};

}  // namespace sketchsp
