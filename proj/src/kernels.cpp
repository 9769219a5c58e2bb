#include "htgcn/kernels.hpp"

#include <cmath>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "htgcn/errors.hpp"

namespace htgcn::kernels {

namespace {

// Below this many multiply-adds the fork/join overhead dominates.
constexpr std::int64_t kParallelThreshold = 1 << 14;

void prepare_output(DenseMatrix& c, std::size_t rows, std::size_t cols, bool accumulate,
                    const char* op) {
  if (accumulate) {
    if (c.rows() != rows || c.cols() != cols) {
      throw ShapeError(std::string(op) + ": accumulator is " + c.shape_string() + ", expected " +
                       std::to_string(rows) + "x" + std::to_string(cols));
    }
  } else {
    c = DenseMatrix(rows, cols);
  }
}

void check_gemm(const DenseMatrix& a, const DenseMatrix& b, std::size_t inner_a,
                std::size_t inner_b, const char* op) {
  if (inner_a != inner_b) {
    throw ShapeError(std::string(op) + ": cannot multiply " + a.shape_string() + " by " +
                     b.shape_string());
  }
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void gemm(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c, bool accumulate) {
  check_gemm(a, b, a.cols(), b.rows(), "gemm");
  prepare_output(c, a.rows(), b.cols(), accumulate, "gemm");
  const auto n = static_cast<std::int64_t>(a.rows());
  const std::size_t inner = a.cols();
  const std::size_t m = b.cols();
  const bool par = n * static_cast<std::int64_t>(inner * m) >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t i = 0; i < n; ++i) {
    double* crow = c.data() + i * m;
    const double* arow = a.data() + i * inner;
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = arow[k];
      const double* brow = b.data() + k * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += aik * brow[j];
    }
  }
}

void gemm_tn(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c, bool accumulate) {
  check_gemm(a, b, a.rows(), b.rows(), "gemm_tn");
  prepare_output(c, a.cols(), b.cols(), accumulate, "gemm_tn");
  const auto n = static_cast<std::int64_t>(a.cols());
  const std::size_t inner = a.rows();
  const std::size_t m = b.cols();
  const std::size_t lda = a.cols();
  const bool par = n * static_cast<std::int64_t>(inner * m) >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t i = 0; i < n; ++i) {
    double* crow = c.data() + i * m;
    for (std::size_t k = 0; k < inner; ++k) {
      const double aki = a.data()[k * lda + i];
      const double* brow = b.data() + k * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += aki * brow[j];
    }
  }
}

void gemm_nt(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c, bool accumulate) {
  check_gemm(a, b, a.cols(), b.cols(), "gemm_nt");
  prepare_output(c, a.rows(), b.rows(), accumulate, "gemm_nt");
  const auto n = static_cast<std::int64_t>(a.rows());
  const std::size_t inner = a.cols();
  const std::size_t m = b.rows();
  const bool par = n * static_cast<std::int64_t>(inner * m) >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t i = 0; i < n; ++i) {
    double* crow = c.data() + i * m;
    const double* arow = a.data() + i * inner;
    for (std::size_t j = 0; j < m; ++j) {
      const double* brow = b.data() + j * inner;
      double s = 0.0;
      for (std::size_t k = 0; k < inner; ++k) s += arow[k] * brow[k];
      crow[j] += s;
    }
  }
}

DenseMatrix row_outer(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("row_outer: row counts differ, " + a.shape_string() + " vs " +
                     b.shape_string());
  }
  const std::size_t da = a.cols();
  const std::size_t db = b.cols();
  DenseMatrix out(a.rows(), da * db);
  const auto n = static_cast<std::int64_t>(a.rows());
  const bool par = n * static_cast<std::int64_t>(da * db) >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t p = 0; p < n; ++p) {
    double* orow = out.data() + p * da * db;
    const double* arow = a.data() + p * da;
    const double* brow = b.data() + p * db;
    for (std::size_t i = 0; i < da; ++i)
      for (std::size_t j = 0; j < db; ++j) orow[i * db + j] = arow[i] * brow[j];
  }
  return out;
}

DenseMatrix degree_normalize(const DenseMatrix& m, std::span<const double> degree) {
  if (m.rows() != m.cols() || degree.size() != m.rows()) {
    throw ShapeError("degree_normalize: matrix " + m.shape_string() + " with " +
                     std::to_string(degree.size()) + " degrees");
  }
  const auto n = static_cast<std::int64_t>(m.rows());
  DenseMatrix out(m.rows(), m.cols());
  const bool par = n * n >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j)
      out(i, j) = m(i, j) / std::sqrt(degree[i] * degree[j]);
  return out;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c;
  gemm(a, b, c);
  return c;
}

namespace serial {

void gemm(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c, bool accumulate) {
  check_gemm(a, b, a.cols(), b.rows(), "gemm");
  prepare_output(c, a.rows(), b.cols(), accumulate, "gemm");
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k)
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += a(i, k) * b(k, j);
}

void gemm_tn(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c, bool accumulate) {
  check_gemm(a, b, a.rows(), b.rows(), "gemm_tn");
  prepare_output(c, a.cols(), b.cols(), accumulate, "gemm_tn");
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t k = 0; k < a.rows(); ++k)
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += a(k, i) * b(k, j);
}

void gemm_nt(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c, bool accumulate) {
  check_gemm(a, b, a.cols(), b.cols(), "gemm_nt");
  prepare_output(c, a.rows(), b.rows(), accumulate, "gemm_nt");
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
      c(i, j) += s;
    }
}

DenseMatrix row_outer(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("row_outer: row counts differ, " + a.shape_string() + " vs " +
                     b.shape_string());
  }
  DenseMatrix out(a.rows(), a.cols() * b.cols());
  for (std::size_t p = 0; p < a.rows(); ++p)
    for (std::size_t i = 0; i < a.cols(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) out(p, i * b.cols() + j) = a(p, i) * b(p, j);
  return out;
}

DenseMatrix degree_normalize(const DenseMatrix& m, std::span<const double> degree) {
  if (m.rows() != m.cols() || degree.size() != m.rows()) {
    throw ShapeError("degree_normalize: matrix " + m.shape_string() + " with " +
                     std::to_string(degree.size()) + " degrees");
  }
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j) / std::sqrt(degree[i] * degree[j]);
  return out;
}

}  // namespace serial

}  // namespace htgcn::kernels
