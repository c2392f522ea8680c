#include "specnoise/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "specnoise/error.hpp"

namespace specnoise {

namespace {

void require_finite(const SymmetricMatrix& m, const char* op) {
  if (!m.all_finite()) {
    throw InvalidInput(std::string(op) + ": matrix has non-finite entries");
  }
}

void check_lapack(lapack_int info, const char* routine) {
  if (info != 0) {
    throw std::runtime_error(std::string(routine) + " failed, info = " + std::to_string(info));
  }
}

// Positions into an ascending spectrum, ordered by |w| desc, w desc, position asc.
std::vector<Eigen::Index> magnitude_order(const Vector& ascending) {
  std::vector<Eigen::Index> order(static_cast<size_t>(ascending.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(ascending(a));
    const double mb = std::abs(ascending(b));
    if (ma != mb) return ma > mb;
    if (ascending(a) != ascending(b)) return ascending(a) > ascending(b);
    return a < b;
  });
  return order;
}

}  // namespace

SymmetricMatrix SymmetricMatrix::from_upper(Matrix m) {
  if (m.rows() != m.cols()) {
    throw InvalidInput("SymmetricMatrix: matrix is not square");
  }
  m.triangularView<Eigen::StrictlyLower>() = m.transpose().triangularView<Eigen::StrictlyLower>();
  SymmetricMatrix s;
  s.m_ = std::move(m);
  return s;
}

SymmetricMatrix SymmetricMatrix::from_dense(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) {
    throw InvalidInput("SymmetricMatrix: matrix is not square");
  }
  const double asym = m.size() == 0 ? 0.0 : (m - m.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= tol)) {
    throw InvalidInput("SymmetricMatrix: asymmetry " + std::to_string(asym) +
                       " exceeds tolerance " + std::to_string(tol));
  }
  return from_upper(m);
}

SymmetricMatrix operator+(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  if (a.order() != b.order()) throw InvalidInput("SymmetricMatrix +: order mismatch");
  // Entrywise sums of two exactly symmetric matrices are exactly symmetric.
  return SymmetricMatrix::from_upper(a.dense() + b.dense());
}

SymmetricMatrix operator-(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  if (a.order() != b.order()) throw InvalidInput("SymmetricMatrix -: order mismatch");
  return SymmetricMatrix::from_upper(a.dense() - b.dense());
}

SymmetricMatrix operator*(double c, const SymmetricMatrix& a) {
  return SymmetricMatrix::from_upper(c * a.dense());
}

double SpectralPair::orthogonality_defect() const {
  const Eigen::Index r = vectors.cols();
  if (r == 0) return 0.0;
  return (vectors.transpose() * vectors - Matrix::Identity(r, r)).cwiseAbs().maxCoeff();
}

void normalize_signs(Matrix& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      const double a = std::abs(vectors(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (vectors.rows() > 0 && vectors(arg, j) < 0.0) vectors.col(j) *= -1.0;
  }
}

EigenDecomposition full_eig(const SymmetricMatrix& m) {
  require_finite(m, "full_eig");
  const Eigen::Index n = m.order();
  EigenDecomposition out;
  if (n == 0) return out;

  Matrix upper = m.dense();
  Matrix a(n, n);
  Vector w(n);
  std::vector<lapack_int> isuppz(static_cast<size_t>(2 * n));
  lapack_int found = 0;
  const auto ln = static_cast<lapack_int>(n);
  check_lapack(LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'A', 'U', ln, upper.data(), ln, 0.0, 0.0, 0, 0, 0.0, &found,
                              w.data(), a.data(), ln, isuppz.data()),
               "dsyevr");

  const auto order = magnitude_order(w);
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = w(order[static_cast<size_t>(k)]);
    out.vectors.col(k) = a.col(order[static_cast<size_t>(k)]);
  }
  normalize_signs(out.vectors);
  return out;
}

SpectralPair top_r(const SymmetricMatrix& m, Eigen::Index r) {
  require_finite(m, "top_r");
  const Eigen::Index n = m.order();
  if (r < 1 || r > n) {
    throw InvalidInput("top_r: r = " + std::to_string(r) + " outside [1, " + std::to_string(n) + "]");
  }
  const auto ln = static_cast<lapack_int>(n);

  // Householder tridiagonalization once; eigenvalues from the tridiagonal
  // form, then MRRR only for the selected index ranges.
  Matrix a = m.dense();
  Vector d(n), e(std::max<Eigen::Index>(n, 1)), tau(std::max<Eigen::Index>(n - 1, 1));
  e.setZero();
  check_lapack(LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'U', ln, a.data(), ln, d.data(), e.data(), tau.data()),
               "dsytrd");

  Vector w = d;
  {
    Vector ee = e;
    check_lapack(LAPACKE_dsterf(ln, w.data(), ee.data()), "dsterf");
  }

  const auto order = magnitude_order(w);
  std::vector<Eigen::Index> chosen(order.begin(), order.begin() + r);
  std::vector<Eigen::Index> sorted = chosen;
  std::sort(sorted.begin(), sorted.end());

  // Eigenvectors of the tridiagonal matrix, keyed by ascending position.
  Matrix tri_vectors(n, r);
  std::vector<Eigen::Index> slot_of(static_cast<size_t>(n), -1);
  Eigen::Index filled = 0;
  for (size_t s = 0; s < sorted.size();) {
    size_t t = s;
    while (t + 1 < sorted.size() && sorted[t + 1] == sorted[t] + 1) ++t;
    const Eigen::Index lo = sorted[s];
    const Eigen::Index hi = sorted[t];
    const Eigen::Index count = hi - lo + 1;

    Vector dd = d;
    Vector ee = e;
    Vector ww(n);
    Matrix z(n, count);
    std::vector<lapack_int> isuppz(static_cast<size_t>(2 * count));
    lapack_int found = 0;
    lapack_logical tryrac = 1;
    check_lapack(LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'I', ln, dd.data(), ee.data(), 0.0, 0.0,
                                static_cast<lapack_int>(lo + 1), static_cast<lapack_int>(hi + 1), &found,
                                ww.data(), z.data(), ln, static_cast<lapack_int>(count), isuppz.data(),
                                &tryrac),
                 "dstemr");
    if (found != count) {
      throw std::runtime_error("dstemr returned " + std::to_string(found) + " of " +
                               std::to_string(count) + " requested eigenvectors");
    }
    for (Eigen::Index j = 0; j < count; ++j) {
      slot_of[static_cast<size_t>(lo + j)] = filled;
      tri_vectors.col(filled++) = z.col(j);
    }
    s = t + 1;
  }

  SpectralPair pair;
  pair.values.resize(r);
  pair.vectors.resize(n, r);
  for (Eigen::Index k = 0; k < r; ++k) {
    const Eigen::Index pos = chosen[static_cast<size_t>(k)];
    pair.values(k) = w(pos);
    pair.vectors.col(k) = tri_vectors.col(slot_of[static_cast<size_t>(pos)]);
  }
  if (n > 1) {
    check_lapack(LAPACKE_dormtr(LAPACK_COL_MAJOR, 'L', 'U', 'N', ln, static_cast<lapack_int>(r), a.data(), ln,
                                tau.data(), pair.vectors.data(), ln),
                 "dormtr");
  }
  normalize_signs(pair.vectors);
  return pair;
}

Vector symmetric_eigenvalues(const SymmetricMatrix& m) {
  require_finite(m, "symmetric_eigenvalues");
  const Eigen::Index n = m.order();
  Vector w(n);
  if (n == 0) return w;
  Matrix a = m.dense();
  check_lapack(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'U', static_cast<lapack_int>(n), a.data(),
                              static_cast<lapack_int>(n), w.data()),
               "dsyevd");
  return w;
}

double two_to_inf_norm(const MatrixRef& t) {
  if (!t.allFinite()) throw InvalidInput("two_to_inf_norm: non-finite entries");
  if (t.rows() == 0 || t.cols() == 0) return 0.0;
  return t.rowwise().norm().maxCoeff();
}

double max_entry_norm(const MatrixRef& t) {
  if (t.size() == 0) return 0.0;
  return t.cwiseAbs().maxCoeff();
}

double spectral_norm(const MatrixRef& t) {
  if (t.size() == 0) return 0.0;
  const Eigen::Index small = std::min(t.rows(), t.cols());
  if (small <= 16) {
    Eigen::JacobiSVD<Matrix> svd(t);
    return svd.singularValues()(0);
  }
  const Matrix gram = t.rows() >= t.cols() ? Matrix(t.transpose() * t) : Matrix(t * t.transpose());
  const Vector w = symmetric_eigenvalues(SymmetricMatrix::from_upper(gram));
  return std::sqrt(std::max(0.0, w(w.size() - 1)));
}

double spectral_norm(const SymmetricMatrix& m) {
  if (m.order() == 0) return 0.0;
  const Vector w = symmetric_eigenvalues(m);
  return std::max(std::abs(w(0)), std::abs(w(w.size() - 1)));
}

MatrixNorms matrix_norms(const MatrixRef& t) {
  if (!t.allFinite()) throw InvalidInput("matrix_norms: non-finite entries");
  MatrixNorms out;
  out.spectral = spectral_norm(t);
  out.frobenius = t.norm();
  out.max_entry = max_entry_norm(t);
  return out;
}

CanonicalAngles canonical_angles(const MatrixRef& u_hat, const MatrixRef& u) {
  if (u_hat.rows() != u.rows() || u_hat.cols() != u.cols()) {
    throw InvalidInput("canonical_angles: frames have shapes " + std::to_string(u_hat.rows()) + "x" +
                       std::to_string(u_hat.cols()) + " and " + std::to_string(u.rows()) + "x" +
                       std::to_string(u.cols()));
  }
  const Eigen::Index r = u.cols();
  CanonicalAngles out;
  out.angles.resize(r);
  out.sines.resize(r);
  out.cosines.resize(r);
  if (r == 0) return out;

  const Matrix cross = u.transpose() * u_hat;
  Eigen::JacobiSVD<Matrix> svd(cross);
  const Vector& sigma = svd.singularValues();  // descending
  double sum_sq = 0.0;
  for (Eigen::Index i = 0; i < r; ++i) {
    const double c = std::clamp(sigma(i), 0.0, 1.0);
    out.cosines(i) = c;
    out.angles(i) = std::acos(c);
    out.sines(i) = std::sin(out.angles(i));
    sum_sq += out.sines(i) * out.sines(i);
  }
  out.sin_spectral = out.sines.maxCoeff();
  out.sin_frobenius = std::sqrt(sum_sq);
  return out;
}

}  // namespace specnoise
