#pragma once

#include <random>

#include "specnoise/linalg.hpp"

namespace testutil {

using specnoise::Matrix;
using specnoise::Vector;

inline Matrix gaussian(std::mt19937_64& g, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> d;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = d(g);
  return m;
}

inline specnoise::SymmetricMatrix symmetric(std::mt19937_64& g, Eigen::Index n) {
  const Matrix a = gaussian(g, n, n);
  return specnoise::SymmetricMatrix::from_upper(0.5 * (a + a.transpose()));
}

/// n x r with orthonormal columns (Householder QR, independent of the library).
inline Matrix orthonormal(std::mt19937_64& g, Eigen::Index n, Eigen::Index r) {
  Eigen::HouseholderQR<Matrix> qr(gaussian(g, n, r));
  return qr.householderQ() * Matrix::Identity(n, r);
}

inline Matrix rotation2(double theta) {
  Matrix w(2, 2);
  w << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return w;
}

/// Largest singular value by power iteration on T^T T.
inline double power_norm(const Matrix& t, int iters = 3000) {
  Vector x = Vector::Ones(t.cols()) / std::sqrt(static_cast<double>(t.cols()));
  double s = 0.0;
  for (int k = 0; k < iters; ++k) {
    Vector y = t.transpose() * (t * x);
    const double ny = y.norm();
    if (ny == 0.0) return 0.0;
    x = y / ny;
    s = std::sqrt(ny);
  }
  return s;
}

}  // namespace testutil
