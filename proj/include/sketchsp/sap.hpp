#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "sketchsp/error.hpp"
#include "sketchsp/lsqr.hpp"
#include "sketchsp/rng.hpp"
#include "sketchsp/sketch.hpp"
#include "sketchsp/sparse.hpp"

namespace sketchsp {

enum class Decomposition { qr, svd };

inline constexpr std::string_view to_string(Decomposition d) { return d == Decomposition::qr ? "qr" : "svd"; }

inline Decomposition parse_decomposition(std::string_view s) {
  if (s == "qr") return Decomposition::qr;
  if (s == "svd") return Decomposition::svd;
  throw ConfigError("unknown decomposition '" + std::string(s) + "'");
}

inline constexpr double kDefaultLsqrTol = 1e-14;
inline constexpr index_t kDefaultMaxIterations = 500;

struct SapConfig {
  double gamma = 2.0;                  ///< oversampling, d = ceil(gamma n)
  Decomposition decomposition = Decomposition::qr;
  SketchConfig sketch{.dist = Distribution::gaussian};  ///< d is overwritten from gamma
  double tol = kDefaultLsqrTol;
  index_t max_iterations = kDefaultMaxIterations;

  void validate() const {
    SKETCHSP_REQUIRE(gamma > 1.0, ConfigError, "gamma must be > 1");
    SKETCHSP_REQUIRE(tol > 0.0, ConfigError, "tol must be > 0");
    SKETCHSP_REQUIRE(max_iterations >= 1, ConfigError, "max_iterations must be >= 1");
  }
};

struct SolveReport {
  std::string method;                  ///< "sap" or "lsqrd"
  std::string decomposition;           ///< "qr", "svd" or "" for lsqrd
  std::vector<double> x;
  index_t m = 0;
  index_t n = 0;
  index_t sketch_rows = 0;
  index_t rank = 0;                    ///< dimension of the preconditioned variable
  index_t iterations = 0;
  bool converged = false;
  bool breakdown = false;
  double error_metric = 0.0;
  double lsqr_metric = 0.0;            ///< LSQR's internal preconditioned estimate at exit
  double sketch_seconds = 0.0;
  double factor_seconds = 0.0;
  double iterate_seconds = 0.0;
  double total_seconds = 0.0;
  std::uint64_t sap_extra_memory_bytes = 0;
  std::vector<std::string> warnings;
};

/// Bytes of the dense d x n sketch that SAP keeps, d = ceil(gamma n).
inline std::uint64_t sap_extra_memory_bytes(index_t n, double gamma) {
  return static_cast<std::uint64_t>(sketch_rows(gamma, n)) * static_cast<std::uint64_t>(n) * sizeof(double);
}

/// Factors the d x n sketch into a right preconditioner.
inline Preconditioner preconditioner_from_sketch(const DenseMatrix& ahat, Decomposition& decomp,
                                                 std::vector<std::string>& warnings) {
  const auto n = ahat.ncols();
  if (decomp == Decomposition::qr) {
    bool singular = ahat.nrows() < n;
    Eigen::MatrixXd r;
    if (!singular) {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(ahat.eigen());
      r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
      for (index_t i = 0; i < n; ++i)
        if (r(i, i) == 0.0 || !std::isfinite(r(i, i))) singular = true;
    }
    if (!singular) return Preconditioner::triangular(std::move(r));
    warnings.emplace_back("R factor of the sketch is singular; falling back to the SVD preconditioner");
    decomp = Decomposition::svd;
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(ahat.eigen(), Eigen::ComputeThinV);
  return Preconditioner::svd_factor(svd.matrixV(), svd.singularValues());
}

/// Sketch-and-precondition least squares: sketch A with d = ceil(gamma n) rows,
/// factor the sketch (Householder QR or SVD), then run LSQR on A N.
inline SolveReport sap_solve(const CscMatrix& a, std::span<const double> b, const SapConfig& cfg) {
  cfg.validate();
  SKETCHSP_REQUIRE(a.ncols() >= 1 && a.nrows() >= 1, ConfigError, "A must be nonempty");
  SKETCHSP_REQUIRE(static_cast<index_t>(b.size()) == a.nrows(), ConfigError, "b length must equal the row count");
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();

  SolveReport rep;
  rep.method = "sap";
  rep.m = a.nrows();
  rep.n = a.ncols();
  SketchConfig sc = cfg.sketch;
  sc.d = sketch_rows(cfg.gamma, a.ncols());
  rep.sketch_rows = sc.d;
  rep.sap_extra_memory_bytes = sap_extra_memory_bytes(a.ncols(), cfg.gamma);
  if (a.nrows() < sc.d)
    rep.warnings.push_back("m = " + std::to_string(a.nrows()) + " is below the sketch size d = " +
                           std::to_string(sc.d));

  auto t0 = clock::now();
  const auto sk = sketch(a, sc);
  rep.sketch_seconds = std::chrono::duration<double>(clock::now() - t0).count();

  t0 = clock::now();
  Decomposition decomp = cfg.decomposition;
  const auto precond = preconditioner_from_sketch(sk.ahat, decomp, rep.warnings);
  rep.decomposition = std::string(to_string(decomp));
  rep.rank = precond.rank();
  rep.factor_seconds = std::chrono::duration<double>(clock::now() - t0).count();

  t0 = clock::now();
  const auto ls = lsqr(a, b, precond, cfg.tol, cfg.max_iterations);
  rep.x.assign(static_cast<std::size_t>(a.ncols()), 0.0);
  if (precond.rank() > 0) precond.apply(ls.y, rep.x);
  rep.iterate_seconds = std::chrono::duration<double>(clock::now() - t0).count();

  rep.iterations = ls.iterations;
  rep.converged = ls.converged;
  rep.breakdown = ls.breakdown;
  rep.lsqr_metric = ls.relative_normal_residual;
  rep.error_metric = error_metric(a, rep.x, b);
  rep.total_seconds = std::chrono::duration<double>(clock::now() - t_start).count();
  return rep;
}

/// Baseline: LSQR with the column-norm diagonal preconditioner.
inline SolveReport lsqrd_solve(const CscMatrix& a, std::span<const double> b, double tol, index_t max_iterations,
                               double eps = std::numeric_limits<double>::epsilon()) {
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();
  SolveReport rep;
  rep.method = "lsqrd";
  rep.m = a.nrows();
  rep.n = a.ncols();
  auto t0 = clock::now();
  const auto precond = diag_preconditioner(a, eps);
  rep.factor_seconds = std::chrono::duration<double>(clock::now() - t0).count();
  rep.rank = precond.rank();
  t0 = clock::now();
  const auto ls = lsqr(a, b, precond, tol, max_iterations);
  rep.x.assign(static_cast<std::size_t>(a.ncols()), 0.0);
  precond.apply(ls.y, rep.x);
  rep.iterate_seconds = std::chrono::duration<double>(clock::now() - t0).count();
  rep.iterations = ls.iterations;
  rep.converged = ls.converged;
  rep.breakdown = ls.breakdown;
  rep.lsqr_metric = ls.relative_normal_residual;
  rep.error_metric = error_metric(a, rep.x, b);
  rep.total_seconds = std::chrono::duration<double>(clock::now() - t_start).count();
  return rep;
}

struct RhsParts {
  std::vector<double> b;  ///< A w + g
  std::vector<double> w;  ///< iid uniform(-1, 1), length n
  std::vector<double> g;  ///< iid N(0, 1), length m
};

/// Right-hand side = a random vector in range(A) plus standard Gaussian noise.
inline RhsParts make_rhs_parts(const CscMatrix& a, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  RhsParts p;
  p.w.resize(static_cast<std::size_t>(a.ncols()));
  for (auto& x : p.w) x = rng.uniform_pm1();
  p.g.resize(static_cast<std::size_t>(a.nrows()));
  for (auto& x : p.g) x = rng.normal();
  p.b.resize(p.g.size());
  a.multiply(p.w, p.b);
  for (std::size_t i = 0; i < p.b.size(); ++i) p.b[i] += p.g[i];
  return p;
}

inline std::vector<double> make_rhs(const CscMatrix& a, std::uint64_t seed) { return make_rhs_parts(a, seed).b; }

inline constexpr double kDefaultConditionCap = 1e8;

/// 2-norm condition number of A N, formed densely. Test utility.
inline double precond_condition_number(const CscMatrix& a, const Preconditioner& p,
                                       double cap = kDefaultConditionCap) {
  SKETCHSP_REQUIRE(static_cast<double>(a.nrows()) * static_cast<double>(p.rank()) <= cap, ConfigError,
                   "dense A N would exceed the size cap");
  const auto m = a.nrows(), r = p.rank();
  if (r == 0) return std::numeric_limits<double>::infinity();
  Eigen::MatrixXd dense(m, r);
  std::vector<double> e(static_cast<std::size_t>(r), 0.0), col(static_cast<std::size_t>(a.ncols()));
  for (index_t i = 0; i < r; ++i) {
    e[i] = 1.0;
    p.apply(e, col);
    a.multiply(col, std::span<double>(dense.col(i).data(), static_cast<std::size_t>(m)));
    e[i] = 0.0;
  }
  const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(dense).singularValues();
  const double smin = sv.minCoeff();
  return smin == 0.0 ? std::numeric_limits<double>::infinity() : sv.maxCoeff() / smin;
}

}  // namespace sketchsp
