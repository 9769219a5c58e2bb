#include <doctest.h>

#include <random>

#include "htgcn/errors.hpp"
#include "htgcn/kernels.hpp"
#include "oracles.hpp"

using namespace htgcn;

TEST_CASE("gemm variants match the naive oracle") {
  std::mt19937_64 rng(11);
  const DenseMatrix a = oracle::random_matrix(37, 19, rng);
  const DenseMatrix b = oracle::random_matrix(19, 23, rng);
  DenseMatrix c;
  kernels::gemm(a, b, c);
  CHECK(max_abs_diff(c, oracle::naive_matmul(a, b)) < 1e-12);

  kernels::gemm_tn(a.transposed(), b, c);
  CHECK(max_abs_diff(c, oracle::naive_matmul(a, b)) < 1e-12);

  kernels::gemm_nt(a, b.transposed(), c);
  CHECK(max_abs_diff(c, oracle::naive_matmul(a, b)) < 1e-12);
}

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
  std::mt19937_64 rng(3);
  // Large enough to cross the parallel threshold.
  const DenseMatrix a = oracle::random_matrix(160, 96, rng);
  const DenseMatrix b = oracle::random_matrix(96, 128, rng);
  const DenseMatrix bt = b.transposed();
  const DenseMatrix at = a.transposed();

  DenseMatrix par, ser;
  kernels::gemm(a, b, par);
  kernels::serial::gemm(a, b, ser);
  CHECK(par == ser);

  kernels::gemm_tn(at, b, par);
  kernels::serial::gemm_tn(at, b, ser);
  CHECK(par == ser);

  kernels::gemm_nt(a, bt, par);
  kernels::serial::gemm_nt(a, bt, ser);
  CHECK(par == ser);

  // accumulate path
  kernels::gemm(a, b, par, true);
  kernels::serial::gemm(a, b, ser, true);
  CHECK(par == ser);

  const DenseMatrix p = oracle::random_matrix(500, 6, rng);
  const DenseMatrix q = oracle::random_matrix(500, 6, rng);
  CHECK(kernels::row_outer(p, q) == kernels::serial::row_outer(p, q));

  const DenseMatrix sq = oracle::random_matrix(200, 200, rng);
  std::vector<double> s(200);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = 1.0 + static_cast<double>(i % 7);
  CHECK(kernels::degree_normalize(sq, s) == kernels::serial::degree_normalize(sq, s));
}

TEST_CASE("row_outer layout") {
  const DenseMatrix a{{1, 2}};
  const DenseMatrix b{{3, 4}};
  CHECK(kernels::row_outer(a, b) == DenseMatrix{{3, 4, 6, 8}});
}

TEST_CASE("shape errors name both shapes") {
  DenseMatrix c;
  const DenseMatrix a(2, 3), b(2, 3);
  CHECK_THROWS_WITH_AS(kernels::gemm(a, b, c), doctest::Contains("2x3"), ShapeError);
  DenseMatrix acc(5, 5);
  CHECK_THROWS_AS(kernels::gemm(a, b.transposed(), acc, true), ShapeError);
  CHECK_THROWS_AS(kernels::row_outer(DenseMatrix(2, 2), DenseMatrix(3, 2)), ShapeError);
}
