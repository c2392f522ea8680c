#pragma once

// Orthogonal alignment of eigenvector frames.

#include "specnoise/linalg.hpp"

namespace specnoise {

struct ProcrustesResult {
  Matrix w;                // r x r orthogonal
  Vector singular_values;  // of U^T U_hat, descending
  double orthogonality_defect = 0.0;
  // U^T U_hat is (numerically) singular, so the minimizer is not unique.
  bool non_unique = false;
};

/// W = V1 V2^T from U^T U_hat = V1 S V2^T; minimizes ||U_hat - U W||_F over O(r).
ProcrustesResult procrustes_align(const MatrixRef& u_hat, const MatrixRef& u);

struct LatentRotation {
  Matrix w_x;
  double residual = 0.0;  // ||rho^{1/2} X - U Lambda^{1/2} W_X||_F
  double orthogonality_defect = 0.0;
};

/// Orthogonal W_X with rho^{1/2} X = U Lambda^{1/2} W_X, taken as the polar
/// factor of Lambda^{-1/2} U^T rho^{1/2} X. Requires Lambda > 0 and
/// rho X X^T = U Lambda U^T to 1e-8 relative (Frobenius).
LatentRotation latent_rotation(const MatrixRef& x, const SpectralPair& pair, double rho);

struct AlignmentPair {
  Matrix w;
  Matrix w_x;
  double w_defect = 0.0;
  double w_x_defect = 0.0;
};

AlignmentPair make_alignment(const ProcrustesResult& procrustes, const LatentRotation& latent);

/// Orthogonal polar factor of a square matrix.
Matrix polar_orthogonal(const MatrixRef& a);

}  // namespace specnoise
