#pragma once

// Dense symmetric spectral primitives, matrix norms and subspace distances.

#include <Eigen/Dense>

namespace specnoise {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixRef = Eigen::Ref<const Matrix>;

/// Real symmetric matrix. Symmetry is exact: construction mirrors the
/// upper triangle into the lower one.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(Eigen::Index n) : m_(Matrix::Zero(n, n)) {}

  /// Mirrors the upper triangle (diagonal included) of `m`.
  static SymmetricMatrix from_upper(Matrix m);

  /// Accepts `m` if it is symmetric to within `tol` in max-entry norm, then
  /// mirrors its upper triangle. Throws InvalidInput otherwise.
  static SymmetricMatrix from_dense(const Matrix& m, double tol = 0.0);

  Eigen::Index order() const { return m_.rows(); }
  const Matrix& dense() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  bool all_finite() const { return m_.allFinite(); }

 private:
  Matrix m_;
};

SymmetricMatrix operator+(const SymmetricMatrix& a, const SymmetricMatrix& b);
SymmetricMatrix operator-(const SymmetricMatrix& a, const SymmetricMatrix& b);
SymmetricMatrix operator*(double c, const SymmetricMatrix& a);

/// Eigenvector frame U (n x r, orthonormal columns) with its eigenvalue
/// block, ordered by non-increasing magnitude.
struct SpectralPair {
  Matrix vectors;
  Vector values;

  Eigen::Index dim() const { return vectors.rows(); }
  Eigen::Index rank() const { return values.size(); }
  Matrix diag() const { return values.asDiagonal(); }

  /// Max-entry defect of U^T U - I.
  double orthogonality_defect() const;
};

/// Full eigendecomposition with eigenvalues sorted by descending magnitude.
struct EigenDecomposition {
  Vector values;
  Matrix vectors;
};

/// All n eigenpairs. Ordering: |lambda| descending, ties by signed value
/// descending, then by ascending position in the ascending spectrum.
/// Each eigenvector has its largest-magnitude entry positive (lowest index
/// wins ties).
EigenDecomposition full_eig(const SymmetricMatrix& m);

/// The r leading-magnitude eigenpairs, same ordering and sign conventions as
/// full_eig. Only the selected eigenvectors are computed.
SpectralPair top_r(const SymmetricMatrix& m, Eigen::Index r);

/// All eigenvalues in ascending order (no eigenvectors).
Vector symmetric_eigenvalues(const SymmetricMatrix& m);

/// Flip column signs so each column's largest-magnitude entry is positive.
void normalize_signs(Matrix& vectors);

/// max_i ||row_i(T)||_2.
double two_to_inf_norm(const MatrixRef& t);

struct MatrixNorms {
  double spectral = 0.0;
  double frobenius = 0.0;
  double max_entry = 0.0;
};

MatrixNorms matrix_norms(const MatrixRef& t);
double spectral_norm(const MatrixRef& t);
/// max |lambda_i|, cheaper than the general path.
double spectral_norm(const SymmetricMatrix& m);
double max_entry_norm(const MatrixRef& t);

struct CanonicalAngles {
  Vector angles;  // ascending, radians in [0, pi/2]
  Vector sines;
  Vector cosines;
  double sin_spectral = 0.0;   // ||sin Theta||
  double sin_frobenius = 0.0;  // ||sin Theta||_F
};

/// Principal angles between span(u_hat) and span(u) from the singular
/// values of U^T U_hat, clamped to [0, 1].
CanonicalAngles canonical_angles(const MatrixRef& u_hat, const MatrixRef& u);

}  // namespace specnoise
