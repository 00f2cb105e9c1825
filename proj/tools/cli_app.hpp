#pragma once

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sketchsp/sketchsp.hpp"

namespace sketchsp::cli {

enum ExitCode : int { kOk = 0, kRuntimeFailure = 1, kUsage = 2, kNotConverged = 3 };

using json = nlohmann::ordered_json;

inline constexpr const char* kThreadsEnv = "SKETCHSP_THREADS";

/// Default thread count: SKETCHSP_THREADS when set to a positive integer, else 1.
inline int default_threads() {
  const char* env = std::getenv(kThreadsEnv);
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 4096) throw ConfigError(std::string(kThreadsEnv) + " must be a positive integer");
  return static_cast<int>(v);
}

inline void emit_json(const json& j, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << j.dump(2) << '\n';
  if (!f) throw Error("write to '" + path + "' failed");
}

struct InputMatrixOptions {
  std::string path;
  bool transpose = false;
  bool drop_empty = false;
};

inline CscMatrix load_input(const InputMatrixOptions& o) {
  CscMatrix a = read_matrix_market(o.path);
  if (o.transpose) a = transpose(a);
  if (o.drop_empty) a = drop_empty(a);
  return a;
}

inline void add_input_options(CLI::App* sub, InputMatrixOptions& o, bool required = true) {
  auto* opt = sub->add_option("--matrix", o.path, "Matrix Market input file");
  if (required) opt->required();
  sub->add_flag("--transpose", o.transpose, "transpose the input before use");
  sub->add_flag("--drop-empty", o.drop_empty, "remove empty rows and columns from the input");
}

inline const std::vector<std::string> kVariantNames{"kji", "jki"};
inline const std::vector<std::string> kDistNames{"rademacher", "uniform", "uniform-scaled", "gaussian"};
inline const std::vector<std::string> kModeNames{"counter", "checkpoint"};

inline json sketch_stats_json(const CscMatrix& a, const SketchConfig& cfg, const SketchStats& st) {
  return json{{"m", a.nrows()},
              {"n", a.ncols()},
              {"nnz", a.nnz()},
              {"d", cfg.d},
              {"variant", to_string(cfg.variant)},
              {"dist", to_string(cfg.dist)},
              {"mode", to_string(cfg.mode)},
              {"block_n", cfg.block_n},
              {"block_d", cfg.block_d},
              {"seed", cfg.seed},
              {"threads", cfg.threads},
              {"workers", st.workers},
              {"tiles", st.tiles},
              {"generated", st.generated},
              {"generated_estimate", generation_count_estimate(a, cfg)},
              {"column_updates", st.column_updates},
              {"kernel_calls", st.kernel_calls},
              {"conversion_seconds", st.conversion_seconds},
              {"compute_seconds", st.compute_seconds},
              {"sample_seconds", st.sample_seconds}};
}

inline json solve_report_json(const SolveReport& r, std::uint64_t seed) {
  return json{{"method", r.method},
              {"decomposition", r.decomposition},
              {"m", r.m},
              {"n", r.n},
              {"seed", seed},
              {"sketch_rows", r.sketch_rows},
              {"rank", r.rank},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"breakdown", r.breakdown},
              {"error_metric", r.error_metric},
              {"lsqr_metric", r.lsqr_metric},
              {"sap_extra_memory_bytes", r.sap_extra_memory_bytes},
              {"sketch_seconds", r.sketch_seconds},
              {"factor_seconds", r.factor_seconds},
              {"iterate_seconds", r.iterate_seconds},
              {"total_seconds", r.total_seconds},
              {"warnings", r.warnings},
              {"x", r.x}};
}

inline json bench_rows_json(const CscMatrix& a, const BenchSpec& spec, const std::vector<BenchRow>& rows) {
  json out{{"m", a.nrows()},       {"n", a.ncols()},     {"nnz", a.nnz()},
           {"d", spec.d},          {"seed", spec.seed},  {"repetitions", spec.repetitions},
           {"warmup", spec.warmup}, {"time_sampling", spec.time_sampling}, {"rows", json::array()}};
  for (const auto& r : rows) {
    out["rows"].push_back(json{{"config_id", r.config_id},
                               {"variant", to_string(r.config.variant)},
                               {"dist", to_string(r.config.dist)},
                               {"mode", to_string(r.config.mode)},
                               {"block_n", r.config.block_n},
                               {"block_d", r.config.block_d},
                               {"threads", r.threads},
                               {"d", r.d},
                               {"nnz", r.nnz},
                               {"failed", r.failed},
                               {"total_seconds", r.total_seconds},
                               {"sample_seconds", r.sample_seconds},
                               {"conversion_seconds", r.conversion_seconds},
                               {"gflops", r.gflops},
                               {"generated", r.generated},
                               {"speedup", r.speedup},
                               {"efficiency", r.efficiency},
                               {"error", r.error}});
  }
  return out;
}

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sketching of tall sparse matrices with on-the-fly random numbers", "sketchsp"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  int threads_default = 1;
  try {
    threads_default = default_threads();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  // sketch
  InputMatrixOptions sk_in;
  std::optional<index_t> sk_d;
  std::optional<double> sk_gamma;
  std::string sk_variant = "kji", sk_dist = "uniform", sk_mode = "counter", sk_out, sk_format = "mtx", sk_stats;
  index_t sk_bn = kDefaultBlockN, sk_bd = kDefaultBlockD;
  std::uint64_t sk_seed = 0;
  int sk_threads = threads_default;
  bool sk_timing = false;
  auto* sk = app.add_subcommand("sketch", "compute S A and write it with a JSON stats sidecar");
  add_input_options(sk, sk_in);
  auto* opt_d = sk->add_option("--d", sk_d, "sketch rows")->check(CLI::PositiveNumber);
  auto* opt_g = sk->add_option("--gamma", sk_gamma, "sketch rows as ceil(gamma n)")->check(CLI::PositiveNumber);
  opt_d->excludes(opt_g);
  sk->add_option("--variant", sk_variant, "kernel")->check(CLI::IsMember(kVariantNames))->capture_default_str();
  sk->add_option("--dist", sk_dist, "entry distribution")->check(CLI::IsMember(kDistNames))->capture_default_str();
  sk->add_option("--mode", sk_mode, "generator mode")->check(CLI::IsMember(kModeNames))->capture_default_str();
  sk->add_option("--bn", sk_bn, "columns of A per tile")->check(CLI::PositiveNumber)->capture_default_str();
  sk->add_option("--bd", sk_bd, "rows of S per tile")->check(CLI::PositiveNumber)->capture_default_str();
  sk->add_option("--seed", sk_seed, "RNG seed")->capture_default_str();
  sk->add_option("--threads", sk_threads, "worker threads")->check(CLI::PositiveNumber);
  sk->add_option("--out", sk_out, "output file for the sketch (default: standard output)");
  sk->add_option("--format", sk_format, "mtx or bin")->check(CLI::IsMember({"mtx", "bin"}))->capture_default_str();
  sk->add_option("--stats", sk_stats, "stats sidecar path (default: <out>.stats.json)");
  sk->add_flag("--time-sampling", sk_timing, "measure time spent generating random numbers");

  // solve
  InputMatrixOptions so_in;
  std::string so_decomp = "qr", so_method = "sap", so_out, so_rhs, so_dist = "gaussian", so_variant = "kji";
  double so_gamma = 2.0, so_tol = kDefaultLsqrTol;
  index_t so_maxit = kDefaultMaxIterations;
  std::uint64_t so_seed = 0;
  int so_threads = threads_default;
  auto* so = app.add_subcommand("solve", "least squares by sketch-and-precondition or diagonally preconditioned LSQR");
  add_input_options(so, so_in);
  so->add_option("--gamma", so_gamma, "oversampling factor")->capture_default_str();
  so->add_option("--decomp", so_decomp, "qr or svd")->check(CLI::IsMember({"qr", "svd"}))->capture_default_str();
  so->add_option("--method", so_method, "sap or lsqrd")->check(CLI::IsMember({"sap", "lsqrd"}))->capture_default_str();
  so->add_option("--tol", so_tol, "LSQR tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  so->add_option("--maxit", so_maxit, "LSQR iteration limit")->check(CLI::PositiveNumber)->capture_default_str();
  so->add_option("--seed", so_seed, "seed for the sketch and the generated right-hand side")->capture_default_str();
  so->add_option("--threads", so_threads, "sketch threads")->check(CLI::PositiveNumber);
  so->add_option("--dist", so_dist, "sketch distribution")->check(CLI::IsMember(kDistNames))->capture_default_str();
  so->add_option("--variant", so_variant, "sketch kernel")->check(CLI::IsMember(kVariantNames))->capture_default_str();
  so->add_option("--rhs", so_rhs, "right-hand side as a Matrix Market array (default: generated from --seed)");
  so->add_option("--out", so_out, "report path (default: standard output)");

  // analyze
  double an_bytes = 0, an_elem = 8, an_h = 0, an_b = 0, an_rho = 0, an_d = 0, an_m = 0, an_n = 0;
  std::string an_out;
  auto* an = app.add_subcommand("analyze", "cache-optimal block shape and attainable fraction of peak");
  an->set_help_flag("--help", "print this help message and exit");
  an->add_option("--cache-bytes", an_bytes, "cache capacity in bytes")->required()->check(CLI::PositiveNumber);
  an->add_option("--elem-size", an_elem, "bytes per matrix entry")->check(CLI::PositiveNumber)->capture_default_str();
  an->add_option("--h", an_h, "RNG cost relative to one memory access, in (0, 1)")->required();
  an->add_option("--B", an_b, "machine balance, flops per memory operation")->required()->check(CLI::PositiveNumber);
  an->add_option("--rho", an_rho, "density of A, in (0, 1]")->required();
  an->add_option("--d", an_d, "sketch rows")->required()->check(CLI::PositiveNumber);
  an->add_option("--m", an_m, "rows of A")->required()->check(CLI::PositiveNumber);
  an->add_option("--n", an_n, "columns of A")->required()->check(CLI::PositiveNumber);
  an->add_option("--out", an_out, "report path (default: standard output)");

  // gen
  std::string gen_kind, gen_out;
  index_t gen_m = 0, gen_n = 0;
  double gen_rho = 0.0;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("gen", "write a synthetic sparse matrix in Matrix Market format");
  gen->add_option("--kind", gen_kind, "uniform, abnormal-a, abnormal-b or abnormal-c")
      ->required()
      ->check(CLI::IsMember({"uniform", "abnormal-a", "abnormal-b", "abnormal-c"}));
  gen->add_option("--m", gen_m, "rows")->required();
  gen->add_option("--n", gen_n, "columns")->required();
  gen->add_option("--rho", gen_rho, "density (uniform only)");
  gen->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
  gen->add_option("--out", gen_out, "output path (default: standard output)");

  // bench
  InputMatrixOptions be_in;
  index_t be_m = 0, be_n = 0;
  double be_rho = 0.0;
  std::optional<index_t> be_d;
  std::optional<double> be_gamma;
  std::vector<std::string> be_variants{"kji", "jki"}, be_dists{"uniform"}, be_modes{"counter"};
  std::vector<index_t> be_bn{kDefaultBlockN}, be_bd{kDefaultBlockD};
  std::vector<int> be_threads = kDefaultBenchThreads;
  int be_reps = 3, be_warmup = 1;
  std::uint64_t be_seed = 0;
  bool be_timing = false;
  std::string be_csv, be_json;
  auto* be = app.add_subcommand("bench", "time sketch configurations over thread counts");
  add_input_options(be, be_in, false);
  be->add_option("--m", be_m, "rows of a generated uniform matrix (without --matrix)");
  be->add_option("--n", be_n, "columns of a generated uniform matrix");
  be->add_option("--rho", be_rho, "density of a generated uniform matrix");
  auto* be_opt_d = be->add_option("--d", be_d, "sketch rows")->check(CLI::PositiveNumber);
  be->add_option("--gamma", be_gamma, "sketch rows as ceil(gamma n)")->check(CLI::PositiveNumber)->excludes(be_opt_d);
  be->add_option("--variants", be_variants, "kernels")->delimiter(',')->check(CLI::IsMember(kVariantNames));
  be->add_option("--dists", be_dists, "distributions")->delimiter(',')->check(CLI::IsMember(kDistNames));
  be->add_option("--modes", be_modes, "generator modes")->delimiter(',')->check(CLI::IsMember(kModeNames));
  be->add_option("--bn", be_bn, "b_n values")->delimiter(',')->check(CLI::PositiveNumber);
  be->add_option("--bd", be_bd, "b_d values")->delimiter(',')->check(CLI::PositiveNumber);
  be->add_option("--threads", be_threads, "thread counts")->delimiter(',')->check(CLI::PositiveNumber);
  be->add_option("--reps", be_reps, "timed repetitions per row")->check(CLI::PositiveNumber)->capture_default_str();
  be->add_option("--warmup", be_warmup, "untimed runs per row")->check(CLI::NonNegativeNumber)->capture_default_str();
  be->add_option("--seed", be_seed, "RNG seed")->capture_default_str();
  be->add_flag("--time-sampling", be_timing, "measure time spent generating random numbers");
  be->add_option("--csv", be_csv, "CSV output path (default: standard output)");
  be->add_option("--json", be_json, "JSON output path");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kUsage;
  }

  try {
    if (sk->parsed()) {
      if (!sk_d && !sk_gamma) {
        err << "error: one of --d or --gamma is required\n\n" << sk->help();
        return kUsage;
      }
      const CscMatrix a = load_input(sk_in);
      SketchConfig cfg;
      cfg.d = sk_d ? *sk_d : sketch_rows(*sk_gamma, a.ncols());
      cfg.block_n = sk_bn;
      cfg.block_d = sk_bd;
      cfg.variant = parse_kernel_variant(sk_variant);
      cfg.dist = parse_distribution(sk_dist);
      cfg.mode = parse_generator_mode(sk_mode);
      cfg.seed = sk_seed;
      cfg.threads = sk_threads;
      cfg.time_sampling = sk_timing;
      const auto res = sketch(a, cfg);
      const auto fmt = parse_dense_format(sk_format);
      if (sk_out.empty() || sk_out == "-") {
        write_dense(out, res.ahat, fmt);
      } else {
        write_dense(sk_out, res.ahat, fmt);
      }
      std::string stats_path = sk_stats;
      if (stats_path.empty() && !sk_out.empty() && sk_out != "-") stats_path = sk_out + ".stats.json";
      if (!stats_path.empty()) emit_json(sketch_stats_json(a, cfg, res.stats), stats_path, out);
      return kOk;
    }

    if (so->parsed()) {
      const CscMatrix a = load_input(so_in);
      std::vector<double> b;
      if (!so_rhs.empty()) {
        std::ifstream f(so_rhs);
        if (!f) throw Error("cannot open '" + so_rhs + "'");
        const DenseMatrix bm = read_dense_matrix_market(f);
        SKETCHSP_REQUIRE(bm.ncols() == 1 && bm.nrows() == a.nrows(), ConfigError,
                         "right-hand side must be an m x 1 array");
        b.assign(bm.values().begin(), bm.values().end());
      } else {
        b = make_rhs(a, so_seed);
      }
      SolveReport rep;
      if (so_method == "sap") {
        SapConfig cfg;
        cfg.gamma = so_gamma;
        cfg.decomposition = parse_decomposition(so_decomp);
        cfg.tol = so_tol;
        cfg.max_iterations = so_maxit;
        cfg.sketch.seed = so_seed;
        cfg.sketch.threads = so_threads;
        cfg.sketch.dist = parse_distribution(so_dist);
        cfg.sketch.variant = parse_kernel_variant(so_variant);
        rep = sap_solve(a, b, cfg);
      } else {
        rep = lsqrd_solve(a, b, so_tol, so_maxit);
      }
      for (const auto& w : rep.warnings) err << "warning: " << w << '\n';
      emit_json(solve_report_json(rep, so_seed), so_out, out);
      return rep.converged ? kOk : kNotConverged;
    }

    if (an->parsed()) {
      const perf::MachineModel mm{an_bytes / an_elem, an_h, an_b};
      mm.validate();
      SKETCHSP_REQUIRE(an_rho > 0.0 && an_rho <= 1.0, ConfigError, "rho must lie in (0, 1]");
      const auto shape = perf::optimize_blocking(mm, an_rho);
      const double inv = perf::inverse_ci(shape, mm, an_rho, an_d, an_m, an_n);
      const double ci = 2.0 * an_rho * an_d * an_m * an_n / inv;
      const auto regime = shape.n1 == 1.0 ? perf::Regime::small_rho : perf::Regime::large_rho;
      const json j{{"cache_entries", mm.cache_entries},
                   {"h", mm.rng_cost},
                   {"B", mm.balance},
                   {"rho", an_rho},
                   {"d", an_d},
                   {"m", an_m},
                   {"n", an_n},
                   {"shape", {{"d1", shape.d1}, {"m1", shape.m1}, {"n1", shape.n1}}},
                   {"regime", perf::to_string(regime)},
                   {"ci", ci},
                   {"ci_small_rho", perf::ci_small_rho(mm)},
                   {"large_rho_block_n", perf::large_rho_block_n(mm, an_rho)},
                   {"peak_fraction", perf::peak_fraction(mm, an_rho, regime)},
                   {"generated_jki", perf::expected_generated_jki(an_d, an_m, an_n, an_rho, shape.n1)},
                   {"generated_kji", perf::expected_generated_kji(an_d, an_m, an_n, an_rho)}};
      emit_json(j, an_out, out);
      return kOk;
    }

    if (gen->parsed()) {
      SKETCHSP_REQUIRE(gen_m >= 1 && gen_n >= 1, ConfigError, "--m and --n must be positive");
      CscMatrix a = gen_kind == "uniform" ? gen_uniform_sparse(gen_m, gen_n, gen_rho, gen_seed)
                                          : gen_abnormal(parse_abnormal_kind(gen_kind), gen_m, gen_n, gen_seed);
      if (gen_out.empty() || gen_out == "-") {
        write_matrix_market(out, a);
      } else {
        write_matrix_market(gen_out, a);
      }
      return kOk;
    }

    if (be->parsed()) {
      CscMatrix a;
      if (!be_in.path.empty()) {
        a = load_input(be_in);
      } else {
        SKETCHSP_REQUIRE(be_m >= 1 && be_n >= 1, ConfigError, "bench needs --matrix or --m, --n and --rho");
        a = gen_uniform_sparse(be_m, be_n, be_rho, be_seed);
      }
      BenchSpec spec;
      SKETCHSP_REQUIRE(be_d || be_gamma, ConfigError, "one of --d or --gamma is required");
      spec.d = be_d ? *be_d : sketch_rows(*be_gamma, a.ncols());
      spec.threads = be_threads;
      spec.repetitions = be_reps;
      spec.warmup = be_warmup;
      spec.seed = be_seed;
      spec.time_sampling = be_timing;
      for (const auto& v : be_variants)
        for (const auto& di : be_dists)
          for (const auto& mo : be_modes)
            for (auto bn : be_bn)
              for (auto bd : be_bd)
                spec.configs.push_back(
                    {parse_kernel_variant(v), parse_distribution(di), parse_generator_mode(mo), bn, bd});
      const auto rows = run_bench(a, spec);
      if (be_csv.empty() || be_csv == "-") {
        if (be_json != "-") write_bench_csv(out, rows);
      } else {
        std::ofstream f(be_csv, std::ios::binary);
        if (!f) throw Error("cannot open '" + be_csv + "' for writing");
        write_bench_csv(f, rows);
      }
      if (!be_json.empty()) emit_json(bench_rows_json(a, spec, rows), be_json, out);
      return kOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kUsage;
}

}  // namespace sketchsp::cli
