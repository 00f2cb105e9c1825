#pragma once

// Least-squares test matrices with controlled spectra.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sketchsp/generators.hpp"
#include "sketchsp/sparse.hpp"

namespace testsupport {

inline Eigen::MatrixXd gaussian_dense(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd g(m, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) g(i, j) = nd(gen);
  return g;
}

inline Eigen::MatrixXd orthonormal_columns(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_dense(m, n, seed));
  return qr.householderQ() * Eigen::MatrixXd::Identity(m, n);
}

/// Sparse full-rank matrix: uniform random pattern plus a unit diagonal in the
/// top n x n block.
inline sketchsp::CscMatrix sparse_full_rank(sketchsp::index_t m, sketchsp::index_t n, double rho,
                                            std::uint64_t seed) {
  auto e = sketchsp::gen_uniform_sparse(m, n, rho, seed).entries();
  for (sketchsp::index_t k = 0; k < n; ++k) e.push_back({k, k, 1.0});
  return sketchsp::CscMatrix::from_entries(m, n, std::move(e));
}

/// Dense m x n matrix U diag(sigma) V^T with log-spaced singular values from 1
/// down to 1 / cond, stored as CSC.
inline sketchsp::CscMatrix with_condition_number(sketchsp::index_t m, sketchsp::index_t n, double cond,
                                                 std::uint64_t seed) {
  const Eigen::MatrixXd u = orthonormal_columns(m, n, seed);
  const Eigen::MatrixXd v = orthonormal_columns(n, n, seed + 1);
  Eigen::VectorXd s(n);
  for (sketchsp::index_t k = 0; k < n; ++k)
    s(k) = std::pow(cond, -static_cast<double>(k) / static_cast<double>(std::max<sketchsp::index_t>(1, n - 1)));
  const Eigen::MatrixXd a = u * s.asDiagonal() * v.transpose();
  sketchsp::DenseMatrix d(m, n);
  d.eigen() = a;
  return sketchsp::CscMatrix::from_dense(d);
}

inline sketchsp::CscMatrix orthonormal_sparse(sketchsp::index_t m, sketchsp::index_t n, std::uint64_t seed) {
  sketchsp::DenseMatrix d(m, n);
  d.eigen() = orthonormal_columns(m, n, seed);
  return sketchsp::CscMatrix::from_dense(d);
}

}  // namespace testsupport
