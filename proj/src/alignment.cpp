#include "specnoise/alignment.hpp"

#include <cmath>
#include <string>

#include "specnoise/error.hpp"

namespace specnoise {

namespace {

double orth_defect(const Matrix& q) {
  if (q.size() == 0) return 0.0;
  return (q.transpose() * q - Matrix::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

Matrix polar_orthogonal(const MatrixRef& a) {
  if (a.rows() != a.cols()) throw InvalidInput("polar_orthogonal: matrix is not square");
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

ProcrustesResult procrustes_align(const MatrixRef& u_hat, const MatrixRef& u) {
  if (u_hat.rows() != u.rows() || u_hat.cols() != u.cols()) {
    throw InvalidInput("procrustes_align: frame shapes differ");
  }
  const Matrix cross = u.transpose() * u_hat;
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  ProcrustesResult out;
  out.w = svd.matrixU() * svd.matrixV().transpose();
  out.singular_values = svd.singularValues();
  out.orthogonality_defect = orth_defect(out.w);
  out.non_unique = out.singular_values.size() > 0 &&
                   out.singular_values(out.singular_values.size() - 1) <= 1e-12;
  return out;
}

LatentRotation latent_rotation(const MatrixRef& x, const SpectralPair& pair, double rho) {
  const Eigen::Index r = pair.rank();
  if (x.rows() != pair.dim() || x.cols() != r) {
    throw InvalidInput("latent_rotation: X must be " + std::to_string(pair.dim()) + "x" + std::to_string(r));
  }
  if (!(rho > 0.0 && rho <= 1.0)) throw InvalidInput("latent_rotation: rho must lie in (0, 1]");
  for (Eigen::Index k = 0; k < r; ++k) {
    if (!(pair.values(k) > 0.0)) {
      throw InvalidInput("latent_rotation: eigenvalue " + std::to_string(k) + " = " +
                         std::to_string(pair.values(k)) + " is not strictly positive");
    }
  }

  const Matrix from_latent = rho * (x * x.transpose());
  const Matrix from_pair = pair.vectors * pair.values.asDiagonal() * pair.vectors.transpose();
  const double scale = std::max(1.0, from_latent.norm());
  const double gap = (from_latent - from_pair).norm();
  if (gap > 1e-8 * scale) {
    throw InvalidInput("latent_rotation: rho X X^T differs from U Lambda U^T by " + std::to_string(gap) +
                       " (Frobenius)");
  }

  const double root_rho = std::sqrt(rho);
  const Vector inv_sqrt = pair.values.cwiseSqrt().cwiseInverse();
  const Matrix y = inv_sqrt.asDiagonal() * (pair.vectors.transpose() * (root_rho * x));

  LatentRotation out;
  out.w_x = polar_orthogonal(y);
  out.orthogonality_defect = orth_defect(out.w_x);
  out.residual =
      (root_rho * x - pair.vectors * pair.values.cwiseSqrt().asDiagonal() * out.w_x).norm();
  return out;
}

AlignmentPair make_alignment(const ProcrustesResult& procrustes, const LatentRotation& latent) {
  AlignmentPair out;
  out.w = procrustes.w;
  out.w_x = latent.w_x;
  out.w_defect = procrustes.orthogonality_defect;
  out.w_x_defect = latent.orthogonality_defect;
  return out;
}

}  // namespace specnoise
