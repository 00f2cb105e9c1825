#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "sketchsp/dense_io.hpp"
#include "sketchsp/generators.hpp"
#include "sketchsp/matrix_market.hpp"
#include "sketchsp/sparse.hpp"

using namespace sketchsp;

namespace {

CscMatrix random_matrix(index_t m, index_t n, double rho, std::uint64_t seed) {
  return gen_uniform_sparse(m, n, rho, seed);
}

// Reference: map keyed by (col, row) holding summed values.
std::map<std::pair<index_t, index_t>, double> as_map(const std::vector<Entry>& e) {
  std::map<std::pair<index_t, index_t>, double> out;
  for (const auto& x : e) out[{x.col, x.row}] += x.value;
  return out;
}

}  // namespace

TEST(CscMatrix, FromEntriesSortsAndSumsDuplicates) {
  auto a = CscMatrix::from_entries(3, 2, {{2, 1, 1.0}, {0, 0, 2.0}, {2, 1, 3.0}, {1, 0, -1.0}});
  EXPECT_TRUE(a.valid());
  ASSERT_EQ(a.nnz(), 3);
  EXPECT_EQ(a.col_ptr()[0], 0);
  EXPECT_EQ(a.col_ptr()[1], 2);
  EXPECT_EQ(a.col_ptr()[2], 3);
  EXPECT_EQ(a.row_idx()[0], 0);
  EXPECT_EQ(a.row_idx()[1], 1);
  EXPECT_DOUBLE_EQ(a.values()[2], 4.0);
}

TEST(CscMatrix, CancellingDuplicatesAreDropped) {
  auto a = CscMatrix::from_entries(2, 2, {{0, 0, 1.0}, {0, 0, -1.0}, {1, 1, 5.0}});
  EXPECT_EQ(a.nnz(), 1);
}

TEST(CscMatrix, OutOfBoundsEntryThrows) {
  EXPECT_THROW(CscMatrix::from_entries(2, 2, {{2, 0, 1.0}}), ConfigError);
  EXPECT_THROW(CscMatrix::from_entries(2, 2, {{0, -1, 1.0}}), ConfigError);
}

TEST(CscMatrix, FromPartsRejectsBrokenStructure) {
  EXPECT_THROW(CscMatrix::from_parts(2, 2, {0, 1}, {0}, {1.0}), ConfigError);            // col_ptr length
  EXPECT_THROW(CscMatrix::from_parts(2, 2, {0, 2, 1}, {0, 1}, {1.0, 1.0}), ConfigError);  // decreasing
  EXPECT_THROW(CscMatrix::from_parts(2, 1, {0, 2}, {1, 0}, {1.0, 1.0}), ConfigError);     // unsorted rows
  EXPECT_THROW(CscMatrix::from_parts(2, 1, {0, 2}, {0, 0}, {1.0, 1.0}), ConfigError);     // duplicate row
  EXPECT_THROW(CscMatrix::from_parts(2, 1, {0, 1}, {2}, {1.0}), ConfigError);             // row out of range
  EXPECT_NO_THROW(CscMatrix::from_parts(2, 1, {0, 2}, {0, 1}, {1.0, 1.0}));
}

TEST(CscMatrix, EmptyColumnsAndRowsArePreserved) {
  auto a = CscMatrix::from_entries(5, 4, {{3, 2, 1.0}});
  EXPECT_EQ(a.nrows(), 5);
  EXPECT_EQ(a.ncols(), 4);
  EXPECT_EQ(a.col_begin(0), a.col_end(0));
  EXPECT_EQ(a.col_begin(3), a.col_end(3));
}

TEST(CscMatrix, DenseRoundTrip) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto a = random_matrix(17, 9, 0.3, seed);
    EXPECT_EQ(CscMatrix::from_dense(a.to_dense()), a);
  }
}

TEST(CscMatrix, MultiplyMatchesDense) {
  auto a = random_matrix(30, 12, 0.2, 7);
  const auto dense = a.to_dense();
  std::vector<double> x(12), y(30), yt(12), xt(30);
  for (int i = 0; i < 12; ++i) x[i] = i - 5.5;
  for (int i = 0; i < 30; ++i) xt[i] = 0.25 * i;
  a.multiply(x, y);
  a.multiply_transpose(xt, yt);
  for (int i = 0; i < 30; ++i) {
    double s = 0;
    for (int k = 0; k < 12; ++k) s += dense(i, k) * x[k];
    EXPECT_NEAR(y[i], s, 1e-12);
  }
  for (int k = 0; k < 12; ++k) {
    double s = 0;
    for (int i = 0; i < 30; ++i) s += dense(i, k) * xt[i];
    EXPECT_NEAR(yt[k], s, 1e-12);
  }
}

TEST(CscMatrix, TransposeIsInvolution) {
  auto a = random_matrix(40, 13, 0.1, 3);
  auto t = transpose(a);
  EXPECT_EQ(t.nrows(), 13);
  EXPECT_EQ(t.ncols(), 40);
  EXPECT_TRUE(t.valid());
  EXPECT_EQ(transpose(t), a);
}

TEST(CscMatrix, DropEmptyRemovesOnlyEmptyLines) {
  auto a = CscMatrix::from_entries(5, 4, {{1, 0, 2.0}, {3, 2, 4.0}, {1, 2, 1.0}});
  auto b = drop_empty(a);
  EXPECT_EQ(b.nrows(), 2);
  EXPECT_EQ(b.ncols(), 2);
  EXPECT_EQ(b.nnz(), 3);
  EXPECT_DOUBLE_EQ(b.frobenius_norm(), a.frobenius_norm());
}

TEST(CscMatrix, IdentityAndNorms) {
  auto i5 = CscMatrix::identity(5);
  EXPECT_EQ(i5.nnz(), 5);
  EXPECT_DOUBLE_EQ(i5.frobenius_norm(), std::sqrt(5.0));
  EXPECT_DOUBLE_EQ(i5.column_norm(3), 1.0);
  EXPECT_DOUBLE_EQ(density(i5), 0.2);
}

TEST(BlockedCsr, EntriesMatchCscForEveryWidth) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto a = random_matrix(50, 23, 0.15, seed);
    const auto ref = as_map(a.entries());
    for (index_t w : {1, 2, 5, 7, 23, 100}) {
      for (int threads : {1, 3}) {
        auto b = to_blocked_csr(a, w, threads);
        EXPECT_EQ(b.block_width, w);
        EXPECT_EQ(static_cast<index_t>(b.blocks.size()), (23 + w - 1) / w);
        EXPECT_EQ(as_map(b.entries()), ref);
        index_t total = 0;
        for (const auto& blk : b.blocks) {
          total += blk.nnz();
          ASSERT_EQ(static_cast<index_t>(blk.row_ptr.size()), 51);
          for (index_t r = 0; r < 50; ++r) {
            for (index_t p = blk.row_ptr[r] + 1; p < blk.row_ptr[r + 1]; ++p)
              EXPECT_LT(blk.col_idx[p - 1], blk.col_idx[p]);
          }
          index_t nz_rows = 0;
          for (index_t r = 0; r < 50; ++r) nz_rows += blk.row_ptr[r] < blk.row_ptr[r + 1];
          EXPECT_EQ(nz_rows, blk.nonzero_rows);
        }
        EXPECT_EQ(total, a.nnz());
      }
    }
  }
}

TEST(BlockedCsr, RejectsNonPositiveWidth) {
  auto a = CscMatrix::identity(3);
  EXPECT_THROW(to_blocked_csr(a, 0), ConfigError);
}

TEST(MatrixMarket, RoundTripIsExact) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto a = random_matrix(31, 17, 0.2, seed);
    std::stringstream ss;
    write_matrix_market(ss, a);
    EXPECT_EQ(read_matrix_market(ss), a);
  }
}

TEST(MatrixMarket, PatternAndIntegerAndSymmetric) {
  std::istringstream pat("%%MatrixMarket matrix coordinate pattern general\n% comment\n3 3 2\n1 1\n3 2\n");
  auto p = read_matrix_market(pat);
  EXPECT_EQ(p.nnz(), 2);
  EXPECT_DOUBLE_EQ(p.to_dense()(2, 1), 1.0);

  std::istringstream in("%%MatrixMarket matrix coordinate integer general\n2 2 1\n2 1 -7\n");
  EXPECT_DOUBLE_EQ(read_matrix_market(in).to_dense()(1, 0), -7.0);

  std::istringstream sym("%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 2.0\n3 1 4.5\n2 2 1.0\n");
  auto s = read_matrix_market(sym).to_dense();
  EXPECT_DOUBLE_EQ(s(2, 0), 4.5);
  EXPECT_DOUBLE_EQ(s(0, 2), 4.5);
  EXPECT_DOUBLE_EQ(s(1, 1), 1.0);
}

TEST(MatrixMarket, OutOfBoundsIndexNamesTheLine) {
  std::istringstream in("%%MatrixMarket matrix coordinate real general\n% c\n2 2 2\n1 1 1.0\n3 1 2.0\n");
  try {
    read_matrix_market(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
  }
}

TEST(MatrixMarket, MalformedInputsThrow) {
  const char* cases[] = {
      "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n",             // coordinate expected
      "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n",      // complex unsupported
      "not a header\n1 1 1\n1 1 1\n",                                             // bad header
      "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n",         // truncated
      "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 abc\n",         // non-numeric
      "%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1.0\n",         // zero index
  };
  for (const char* c : cases) {
    std::istringstream in(c);
    EXPECT_THROW(read_matrix_market(in), ParseError) << c;
  }
}

TEST(MatrixMarket, DenseArrayRoundTrip) {
  DenseMatrix d(3, 2);
  for (index_t j = 0; j < 2; ++j)
    for (index_t i = 0; i < 3; ++i) d(i, j) = 0.1 * static_cast<double>(i) - std::ldexp(1.0, -40) * j;
  std::stringstream ss;
  write_dense_matrix_market(ss, d);
  EXPECT_EQ(read_dense_matrix_market(ss), d);
}

TEST(DenseBinary, RoundTripAndHeader) {
  DenseMatrix d(2, 3);
  for (index_t k = 0; k < 6; ++k) d.values()[k] = -1.5 + k;
  std::stringstream ss;
  write_dense_binary(ss, d);
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 16u + 6u * 8u);
  EXPECT_EQ(bytes.substr(0, 8), "SKAHAT01");
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 2);
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 3);
  EXPECT_EQ(read_dense_binary(ss), d);
  std::istringstream bad("XXXXXXXX");
  EXPECT_THROW(read_dense_binary(bad), ParseError);
}

TEST(Generators, UniformDensityAndDeterminism) {
  auto a = gen_uniform_sparse(2000, 100, 0.01, 5);
  EXPECT_EQ(a, gen_uniform_sparse(2000, 100, 0.01, 5));
  EXPECT_NE(a, gen_uniform_sparse(2000, 100, 0.01, 6));
  EXPECT_TRUE(a.valid());
  // nnz ~ Binomial(2e5, 0.01): mean 2000, sd ~ 44.5
  EXPECT_NEAR(static_cast<double>(a.nnz()), 2000.0, 5 * 44.5);
  for (double v : a.values()) {
    EXPECT_GT(v, -1.0);
    EXPECT_LT(v, 1.0);
    EXPECT_NE(v, 0.0);
  }
  EXPECT_EQ(gen_uniform_sparse(10, 7, 1.0, 1).nnz(), 70);
  EXPECT_THROW(gen_uniform_sparse(10, 10, 0.0, 1), ConfigError);
  EXPECT_THROW(gen_uniform_sparse(10, 10, 1.5, 1), ConfigError);
}

TEST(Generators, AbnormalCountsAndPlacement) {
  auto a = gen_abnormal(AbnormalKind::a, 5000, 40);
  EXPECT_EQ(a.nnz(), 5 * 40);
  for (index_t r : a.row_idx()) EXPECT_EQ((r + 1) % 1000, 0);

  auto c = gen_abnormal(AbnormalKind::c, 50, 3000);
  EXPECT_EQ(c.nnz(), 3 * 50);
  for (index_t k = 0; k < 3000; ++k)
    EXPECT_EQ(c.col_end(k) - c.col_begin(k), (k + 1) % 1000 == 0 ? 50 : 0);

  auto b = gen_abnormal(AbnormalKind::b, 3000, 900, 4);
  EXPECT_TRUE(b.valid());
  EXPECT_EQ(b.nnz(), 2700);
  index_t inner = 0;
  for (index_t k = 300; k < 600; ++k) inner += b.col_end(k) - b.col_begin(k);
  EXPECT_EQ(inner, std::llround(2700 * 2998.0 / 3000.0));
  EXPECT_EQ(b, gen_abnormal(AbnormalKind::b, 3000, 900, 4));

  EXPECT_THROW(gen_abnormal(AbnormalKind::a, 999, 10), ConfigError);
  EXPECT_THROW(gen_abnormal(AbnormalKind::c, 10, 999), ConfigError);
  EXPECT_EQ(parse_abnormal_kind("abnormal-b"), AbnormalKind::b);
}
