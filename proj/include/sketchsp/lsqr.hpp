#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sketchsp/error.hpp"
#include "sketchsp/sparse.hpp"

namespace sketchsp {

enum class PreconditionerKind { identity, diagonal, triangular, svd_factor };

inline constexpr std::string_view to_string(PreconditionerKind k) {
  switch (k) {
    case PreconditionerKind::identity: return "identity";
    case PreconditionerKind::diagonal: return "diagonal";
    case PreconditionerKind::triangular: return "triangular";
    case PreconditionerKind::svd_factor: return "svd_factor";
  }
  return "?";
}

inline constexpr double kSvdDropRatio = 1e-12;

/// Right preconditioner for min ||A x - b||. LSQR works on A N in the variable
/// y and the solution is recovered as x = N y, where
///   identity:   N = I
///   diagonal:   N = D
///   triangular: N = R^{-1}  (R upper triangular from a QR of the sketch)
///   svd_factor: N = V_r diag(1 / sigma_r), singular values below
///               sigma_max * 1e-12 dropped
class Preconditioner {
 public:
  static Preconditioner identity(index_t n) {
    Preconditioner p;
    p.kind_ = PreconditionerKind::identity;
    p.n_ = p.rank_ = n;
    return p;
  }

  static Preconditioner diagonal(std::vector<double> d) {
    for (double x : d)
      SKETCHSP_REQUIRE(std::isfinite(x) && x > 0.0, ConfigError, "diagonal preconditioner entries must be finite and > 0");
    Preconditioner p;
    p.kind_ = PreconditionerKind::diagonal;
    p.n_ = p.rank_ = static_cast<index_t>(d.size());
    p.diag_ = std::move(d);
    return p;
  }

  static Preconditioner triangular(Eigen::MatrixXd r) {
    SKETCHSP_REQUIRE(r.rows() == r.cols(), ConfigError, "triangular factor must be square");
    for (Eigen::Index i = 0; i < r.rows(); ++i)
      SKETCHSP_REQUIRE(r(i, i) != 0.0 && std::isfinite(r(i, i)), ConfigError, "triangular factor is singular");
    Preconditioner p;
    p.kind_ = PreconditionerKind::triangular;
    p.n_ = p.rank_ = r.rows();
    p.factor_ = r.triangularView<Eigen::Upper>();
    return p;
  }

  /// From the thin right singular vectors `v` (n x k) and singular values
  /// (descending) of the sketch.
  static Preconditioner svd_factor(const Eigen::MatrixXd& v, const Eigen::VectorXd& sigma,
                                   double drop_ratio = kSvdDropRatio) {
    SKETCHSP_REQUIRE(v.cols() == sigma.size(), ConfigError, "singular vector / value count mismatch");
    const double smax = sigma.size() > 0 ? sigma.maxCoeff() : 0.0;
    const double cutoff = smax * drop_ratio;
    Eigen::Index r = 0;
    while (r < sigma.size() && sigma(r) > 0.0 && sigma(r) >= cutoff) ++r;
    Preconditioner p;
    p.kind_ = PreconditionerKind::svd_factor;
    p.n_ = v.rows();
    p.rank_ = r;
    p.kept_sigma_ = sigma.head(r);
    p.factor_ = v.leftCols(r) * sigma.head(r).cwiseInverse().asDiagonal();
    return p;
  }

  PreconditionerKind kind() const noexcept { return kind_; }
  index_t n() const noexcept { return n_; }
  /// Dimension of the LSQR variable y.
  index_t rank() const noexcept { return rank_; }
  const std::vector<double>& diagonal_entries() const noexcept { return diag_; }
  const Eigen::MatrixXd& factor() const noexcept { return factor_; }
  const Eigen::VectorXd& kept_singular_values() const noexcept { return kept_sigma_; }

  /// x = N y (length rank -> length n).
  void apply(std::span<const double> y, std::span<double> x) const {
    switch (kind_) {
      case PreconditionerKind::identity:
        std::copy(y.begin(), y.end(), x.begin());
        break;
      case PreconditionerKind::diagonal:
        for (index_t i = 0; i < n_; ++i) x[i] = diag_[i] * y[i];
        break;
      case PreconditionerKind::triangular: {
        Eigen::Map<Eigen::VectorXd> xv(x.data(), n_);
        xv = Eigen::Map<const Eigen::VectorXd>(y.data(), n_);
        factor_.triangularView<Eigen::Upper>().solveInPlace(xv);
        break;
      }
      case PreconditionerKind::svd_factor:
        Eigen::Map<Eigen::VectorXd>(x.data(), n_).noalias() =
            factor_ * Eigen::Map<const Eigen::VectorXd>(y.data(), rank_);
        break;
    }
  }

  /// y = N^T x (length n -> length rank).
  void apply_adjoint(std::span<const double> x, std::span<double> y) const {
    switch (kind_) {
      case PreconditionerKind::identity:
        std::copy(x.begin(), x.end(), y.begin());
        break;
      case PreconditionerKind::diagonal:
        for (index_t i = 0; i < n_; ++i) y[i] = diag_[i] * x[i];
        break;
      case PreconditionerKind::triangular: {
        Eigen::Map<Eigen::VectorXd> yv(y.data(), n_);
        yv = Eigen::Map<const Eigen::VectorXd>(x.data(), n_);
        factor_.transpose().triangularView<Eigen::Lower>().solveInPlace(yv);
        break;
      }
      case PreconditionerKind::svd_factor:
        Eigen::Map<Eigen::VectorXd>(y.data(), rank_).noalias() =
            factor_.transpose() * Eigen::Map<const Eigen::VectorXd>(x.data(), n_);
        break;
    }
  }

 private:
  PreconditionerKind kind_ = PreconditionerKind::identity;
  index_t n_ = 0;
  index_t rank_ = 0;
  std::vector<double> diag_;
  Eigen::MatrixXd factor_;
  Eigen::VectorXd kept_sigma_;
};

/// Column-norm scaling: D_ii = 1 / ||A_i||, except D_ii = 1 when
/// ||A_i|| <= eps sqrt(n) max_k ||A_k|| (which covers zero columns).
inline Preconditioner diag_preconditioner(const CscMatrix& a, double eps = std::numeric_limits<double>::epsilon()) {
  SKETCHSP_REQUIRE(eps >= 0.0, ConfigError, "eps must be >= 0");
  std::vector<double> norms(static_cast<std::size_t>(a.ncols()));
  double nmax = 0.0;
  for (index_t k = 0; k < a.ncols(); ++k) {
    norms[k] = a.column_norm(k);
    nmax = std::max(nmax, norms[k]);
  }
  const double floor = eps * std::sqrt(static_cast<double>(a.ncols())) * nmax;
  for (auto& c : norms) c = c <= floor ? 1.0 : 1.0 / c;
  return Preconditioner::diagonal(std::move(norms));
}

struct LsqrResult {
  std::vector<double> y;           ///< solution of the preconditioned problem
  index_t iterations = 0;
  bool converged = false;
  bool breakdown = false;          ///< a bidiagonalization vector vanished
  double residual_norm = 0.0;      ///< LSQR's estimate of ||b - A x||
  double normal_residual = 0.0;    ///< estimate of ||(A N)^T r||
  double operator_norm = 0.0;      ///< Frobenius-type estimate of ||A N||
  double relative_normal_residual = 0.0;  ///< the quantity compared to tol
  std::vector<double> residual_history;   ///< residual estimate after each iteration
};

/// LSQR (Paige & Saunders) on the right-preconditioned operator A N.
///
/// Stops when ||(A N)^T r|| / (||A N|| ||r||) <= tol (the least-squares
/// test), or when ||r|| <= tol ||b|| (a consistent system solved), or after
/// `max_iterations`. Norms are LSQR's recurrence estimates.
inline LsqrResult lsqr(const CscMatrix& a, std::span<const double> b, const Preconditioner& p, double tol,
                       index_t max_iterations, bool record_history = false) {
  SKETCHSP_REQUIRE(static_cast<index_t>(b.size()) == a.nrows(), ConfigError, "b length must equal the row count");
  SKETCHSP_REQUIRE(p.n() == a.ncols(), ConfigError, "preconditioner size must equal the column count");
  SKETCHSP_REQUIRE(tol > 0.0, ConfigError, "tolerance must be positive");
  SKETCHSP_REQUIRE(max_iterations >= 0, ConfigError, "max_iterations must be >= 0");

  const auto m = static_cast<std::size_t>(a.nrows());
  const auto n = static_cast<std::size_t>(a.ncols());
  const auto r = static_cast<std::size_t>(p.rank());
  std::vector<double> u(b.begin(), b.end()), v(r), w(r), at(r), tmp_n(n), tmp_m(m);
  LsqrResult res;
  res.y.assign(r, 0.0);

  auto norm = [](std::span<const double> x) {
    double s = 0.0;
    for (double t : x) s += t * t;
    return std::sqrt(s);
  };
  auto scale = [](std::span<double> x, double f) {
    for (auto& t : x) t *= f;
  };
  // out = (A N) in
  auto forward = [&](std::span<const double> in, std::span<double> out) {
    p.apply(in, tmp_n);
    a.multiply(tmp_n, out);
  };
  // out = (A N)^T in
  auto adjoint = [&](std::span<const double> in, std::span<double> out) {
    a.multiply_transpose(in, tmp_n);
    p.apply_adjoint(tmp_n, out);
  };

  double beta = norm(u);
  const double bnorm = beta;
  if (beta == 0.0) {
    res.converged = true;
    res.breakdown = true;
    return res;
  }
  scale(u, 1.0 / beta);
  adjoint(u, v);
  double alpha = norm(v);
  res.residual_norm = beta;
  if (alpha == 0.0 || r == 0) {
    // A^T b = 0: x = 0 is already a least-squares solution.
    res.converged = true;
    res.breakdown = true;
    return res;
  }
  scale(v, 1.0 / alpha);
  w = v;

  double phibar = beta, rhobar = alpha, anorm2 = 0.0;
  for (index_t it = 1; it <= max_iterations; ++it) {
    // u = A N v - alpha u
    forward(v, tmp_m);
    for (std::size_t i = 0; i < m; ++i) u[i] = tmp_m[i] - alpha * u[i];
    beta = norm(u);
    anorm2 += alpha * alpha + beta * beta;
    if (beta > 0.0) {
      scale(u, 1.0 / beta);
      // v = (A N)^T u - beta v
      adjoint(u, at);
      for (std::size_t i = 0; i < r; ++i) v[i] = at[i] - beta * v[i];
      alpha = norm(v);
      if (alpha > 0.0) scale(v, 1.0 / alpha);
    } else {
      res.breakdown = true;
    }

    const double rho = std::hypot(rhobar, beta);
    const double c = rhobar / rho;
    const double s = beta / rho;
    const double theta = s * alpha;
    rhobar = -c * alpha;
    const double phi = c * phibar;
    phibar = s * phibar;

    const double t1 = phi / rho, t2 = -theta / rho;
    for (std::size_t i = 0; i < r; ++i) {
      res.y[i] += t1 * w[i];
      w[i] = v[i] + t2 * w[i];
    }

    res.iterations = it;
    res.operator_norm = std::sqrt(anorm2);
    res.residual_norm = phibar;
    res.normal_residual = alpha * std::abs(c) * phibar;
    res.relative_normal_residual =
        phibar == 0.0 ? 0.0 : res.normal_residual / (res.operator_norm * res.residual_norm);
    if (record_history) res.residual_history.push_back(phibar);

    if (beta == 0.0 || alpha == 0.0) res.breakdown = true;
    if (res.residual_norm <= tol * bnorm || res.relative_normal_residual <= tol || res.breakdown) {
      res.converged = true;
      break;
    }
  }
  return res;
}

/// ||A^T (A x - b)|| / (||A||_F ||A x - b||); 0 when the residual vanishes.
inline double error_metric(const CscMatrix& a, std::span<const double> x, std::span<const double> b) {
  SKETCHSP_REQUIRE(static_cast<index_t>(x.size()) == a.ncols() && static_cast<index_t>(b.size()) == a.nrows(),
                   ConfigError, "shape mismatch in error_metric");
  std::vector<double> r(b.size()), atr(x.size());
  a.multiply(x, r);
  double rn = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] -= b[i];
    rn += r[i] * r[i];
  }
  rn = std::sqrt(rn);
  const double af = a.frobenius_norm();
  if (rn == 0.0 || af == 0.0) return 0.0;
  a.multiply_transpose(r, atr);
  double an = 0.0;
  for (double t : atr) an += t * t;
  return std::sqrt(an) / (af * rn);
}

}  // namespace sketchsp
