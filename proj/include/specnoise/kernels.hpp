#pragma once

// Data-parallel dense kernels. Every kernel has a plain-loop serial
// reference and an OpenMP variant. The OpenMP variants split rows into
// fixed-size chunks, so results do not depend on the thread count.

#include <vector>

#include "specnoise/linalg.hpp"

namespace specnoise::kernels {

inline constexpr Eigen::Index kRowChunk = 64;

namespace serial {

/// S * B by explicit loops.
Matrix block_product(const MatrixRef& s, const MatrixRef& b);

/// Euclidean norm of every row.
Vector row_norms(const MatrixRef& t);

/// [S B, S^2 B, ..., S^k_max B], never forming a power of S.
std::vector<Matrix> power_sequence(const MatrixRef& s, const MatrixRef& b, int k_max);

}  // namespace serial

namespace parallel {

Matrix block_product(const MatrixRef& s, const MatrixRef& b, int threads);
Vector row_norms(const MatrixRef& t, int threads);
std::vector<Matrix> power_sequence(const MatrixRef& s, const MatrixRef& b, int k_max, int threads);

}  // namespace parallel

}  // namespace specnoise::kernels
