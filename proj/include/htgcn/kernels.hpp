#pragma once

#include <span>

#include "htgcn/dense_matrix.hpp"

// Dense kernels used by the autodiff engine and graph preprocessing.
//
// htgcn::kernels holds the OpenMP versions; htgcn::kernels::serial holds the
// single-threaded reference loops they are tested against. Both partition work
// by output row and accumulate each row in the same order, so the two paths
// produce bit-identical results regardless of thread count.
namespace htgcn::kernels {

// c = a * b, or c += a * b when accumulate is set. c is resized when not accumulating.
void gemm(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c, bool accumulate = false);
// c (+)= a^T * b
void gemm_tn(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c, bool accumulate = false);
// c (+)= a * b^T
void gemm_nt(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c, bool accumulate = false);

// Row-wise outer product: out[p, i*b.cols + j] = a[p,i] * b[p,j].
DenseMatrix row_outer(const DenseMatrix& a, const DenseMatrix& b);

// out[i,j] = m[i,j] / sqrt(degree[i] * degree[j]). One rounding per entry, so
// regular graphs with square-number degree products normalize exactly.
DenseMatrix degree_normalize(const DenseMatrix& m, std::span<const double> degree);

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

namespace serial {

void gemm(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c, bool accumulate = false);
void gemm_tn(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c, bool accumulate = false);
void gemm_nt(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c, bool accumulate = false);
DenseMatrix row_outer(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix degree_normalize(const DenseMatrix& m, std::span<const double> degree);

}  // namespace serial

// Number of threads the parallel kernels will use (1 without OpenMP).
int max_threads();

}  // namespace htgcn::kernels
