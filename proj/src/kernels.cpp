#include "specnoise/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "specnoise/error.hpp"

namespace specnoise::kernels {

namespace {

void check_shapes(const MatrixRef& s, const MatrixRef& b) {
  if (s.cols() != b.rows()) throw InvalidInput("block_product: inner dimensions differ");
}

Eigen::Index chunk_count(Eigen::Index rows) { return (rows + kRowChunk - 1) / kRowChunk; }

}  // namespace

namespace serial {

Matrix block_product(const MatrixRef& s, const MatrixRef& b) {
  check_shapes(s, b);
  Matrix out = Matrix::Zero(s.rows(), b.cols());
  for (Eigen::Index c = 0; c < b.cols(); ++c) {
    for (Eigen::Index k = 0; k < s.cols(); ++k) {
      const double bk = b(k, c);
      for (Eigen::Index i = 0; i < s.rows(); ++i) out(i, c) += s(i, k) * bk;
    }
  }
  return out;
}

Vector row_norms(const MatrixRef& t) {
  Vector out(t.rows());
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < t.cols(); ++j) acc += t(i, j) * t(i, j);
    out(i) = std::sqrt(acc);
  }
  return out;
}

std::vector<Matrix> power_sequence(const MatrixRef& s, const MatrixRef& b, int k_max) {
  std::vector<Matrix> out;
  out.reserve(static_cast<size_t>(std::max(k_max, 0)));
  Matrix cur = b;
  for (int k = 1; k <= k_max; ++k) {
    cur = block_product(s, cur);
    out.push_back(cur);
  }
  return out;
}

}  // namespace serial

namespace parallel {

Matrix block_product(const MatrixRef& s, const MatrixRef& b, int threads) {
  check_shapes(s, b);
  Matrix out(s.rows(), b.cols());
  const Eigen::Index chunks = chunk_count(s.rows());
#pragma omp parallel for schedule(static) num_threads(std::max(threads, 1))
  for (Eigen::Index c = 0; c < chunks; ++c) {
    const Eigen::Index begin = c * kRowChunk;
    const Eigen::Index len = std::min(kRowChunk, s.rows() - begin);
    out.middleRows(begin, len).noalias() = s.middleRows(begin, len) * b;
  }
  return out;
}

Vector row_norms(const MatrixRef& t, int threads) {
  Vector out(t.rows());
#pragma omp parallel for schedule(static) num_threads(std::max(threads, 1))
  for (Eigen::Index i = 0; i < t.rows(); ++i) out(i) = t.row(i).norm();
  return out;
}

std::vector<Matrix> power_sequence(const MatrixRef& s, const MatrixRef& b, int k_max, int threads) {
  std::vector<Matrix> out;
  out.reserve(static_cast<size_t>(std::max(k_max, 0)));
  Matrix cur = b;
  for (int k = 1; k <= k_max; ++k) {
    cur = block_product(s, cur, threads);
    out.push_back(cur);
  }
  return out;
}

}  // namespace parallel

}  // namespace specnoise::kernels
