#include "specnoise/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "specnoise/error.hpp"
#include "specnoise/kernels.hpp"

namespace specnoise {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void check_shapes(const ModelInstance& instance, const SpectralPair& pair, const SpectralPair& pair_hat) {
  const Eigen::Index n = instance.m.order();
  if (pair.dim() != n || pair_hat.dim() != n) throw InvalidInput("frames must have n rows");
  if (pair.rank() != pair_hat.rank() || pair.vectors.cols() != pair.rank() ||
      pair_hat.vectors.cols() != pair_hat.rank()) {
    throw InvalidInput("frames must share the rank r");
  }
}

void check_invertible(const Vector& values, const char* what) {
  if (values.size() == 0) throw InvalidInput(std::string(what) + " is empty");
  const double top = values.cwiseAbs().maxCoeff();
  const double bottom = values.cwiseAbs().minCoeff();
  if (!(bottom > 1e-12 * top) || bottom == 0.0) {
    throw InvalidInput(std::string(what) + " is singular (smallest magnitude " + num(bottom) + ")");
  }
}

void check_low_rank(const ModelInstance& instance, const SpectralPair& pair) {
  const Matrix& m = instance.m.dense();
  const Matrix rebuilt = pair.vectors * pair.values.asDiagonal() * pair.vectors.transpose();
  const double gap = (m - rebuilt).norm();
  if (gap > 1e-8 * std::max(m.norm(), 1e-300)) {
    throw InvalidInput("M differs from U Lambda U^T by " + num(gap) +
                       " (Frobenius); only exactly rank-r signals are supported");
  }
}

}  // namespace

int k_of_n(Eigen::Index n, double rho) {
  const double scale = static_cast<double>(n) * rho;
  if (n < 2 || !(scale > 1.0)) {
    throw InvalidInput("k_of_n: need n rho > 1 (got n rho = " + num(scale) + ")");
  }
  const double ratio = std::log(static_cast<double>(n)) / std::log(scale);
  // Exact powers (n rho = n^{1/k}) must not round up past k.
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) return std::max(1, static_cast<int>(nearest));
  return std::max(1, static_cast<int>(std::ceil(ratio)));
}

DecompositionReport decompose(const ModelInstance& instance, const SpectralPair& pair,
                              const SpectralPair& pair_hat, const MatrixRef& w) {
  check_shapes(instance, pair, pair_hat);
  const Eigen::Index r = pair.rank();
  if (w.rows() != r || w.cols() != r) throw InvalidInput("decompose: W must be r x r");
  check_invertible(pair_hat.values, "decompose: Lambda_hat");
  check_invertible(pair.values, "decompose: Lambda");
  check_low_rank(instance, pair);

  const Matrix& e = instance.e.dense();
  const Matrix& m_hat = instance.m_hat.dense();
  const Matrix& u = pair.vectors;
  const Matrix& u_hat = pair_hat.vectors;
  const Vector& lam = pair.values;
  const Vector& lam_hat = pair_hat.values;
  const Vector lam_inv = lam.cwiseInverse();
  const Vector lam_hat_inv = lam_hat.cwiseInverse();

  const Matrix eu = e * u;
  const Matrix eu_hat = e * u_hat;
  const Matrix cross = u.transpose() * u_hat;  // U^T U_hat

  DecompositionReport rep;
  rep.h1 = lam_inv * lam_hat_inv.transpose();
  rep.h2 = rep.h1.cwiseAbs2();

  rep.deviation = u_hat - u * w;
  rep.noise_projection = eu_hat * lam_hat_inv.asDiagonal();
  const Matrix ut_e_uhat = u.transpose() * eu_hat;
  rep.eigenvalue_mismatch = u * lam.asDiagonal() * (-rep.h1.cwiseProduct(ut_e_uhat));
  rep.alignment_gap = u * (cross - w);

  rep.leading = eu * lam_inv.asDiagonal() * w;
  // U^T (M_hat E + E M_hat - E^2) U_hat, which equals U^T (M_hat^2 - M^2) U_hat.
  const Matrix mid = (m_hat * u).transpose() * eu_hat + eu.transpose() * (m_hat * u_hat) - eu.transpose() * eu_hat;
  rep.second_eigenvalue_mismatch = eu * lam.asDiagonal() * (-rep.h2.cwiseProduct(mid));
  rep.second_alignment_gap = eu * lam_inv.asDiagonal() * (cross - w);
  rep.series_tail = rep.noise_projection -
                    eu * lam.asDiagonal() * cross * lam_hat_inv.cwiseAbs2().asDiagonal();

  rep.residual = rep.eigenvalue_mismatch + rep.alignment_gap + rep.second_eigenvalue_mismatch +
                 rep.second_alignment_gap + rep.series_tail;

  rep.first_identity_defect =
      max_entry_norm(rep.deviation - (rep.noise_projection + rep.eigenvalue_mismatch + rep.alignment_gap));
  rep.second_identity_defect =
      max_entry_norm(rep.noise_projection - (rep.leading + rep.second_eigenvalue_mismatch +
                                             rep.second_alignment_gap + rep.series_tail));

  auto& t = rep.two_to_inf;
  t.deviation = two_to_inf_norm(rep.deviation);
  t.leading = two_to_inf_norm(rep.leading);
  t.residual = two_to_inf_norm(rep.residual);
  t.noise_projection = two_to_inf_norm(rep.noise_projection);
  t.eigenvalue_mismatch = two_to_inf_norm(rep.eigenvalue_mismatch);
  t.alignment_gap = two_to_inf_norm(rep.alignment_gap);
  t.second_eigenvalue_mismatch = two_to_inf_norm(rep.second_eigenvalue_mismatch);
  t.second_alignment_gap = two_to_inf_norm(rep.second_alignment_gap);
  t.series_tail = two_to_inf_norm(rep.series_tail);
  return rep;
}

NeumannReport neumann_partial(const ModelInstance& instance, const SpectralPair& pair,
                              const SpectralPair& pair_hat, int order) {
  check_shapes(instance, pair, pair_hat);
  if (order < 0) throw InvalidInput("neumann_partial: order must be nonnegative");
  check_invertible(pair_hat.values, "neumann_partial: Lambda_hat");

  NeumannReport rep;
  rep.noise_norm = spectral_norm(instance.e);
  const double inv_hat = 1.0 / pair_hat.values.cwiseAbs().minCoeff();
  rep.contraction = rep.noise_norm * inv_hat;
  if (!(rep.contraction < 1.0)) {
    throw InvalidInput("neumann_partial: series does not converge, ||E|| ||Lambda_hat^{-1}|| = " +
                       num(rep.contraction));
  }
  const double lam_norm = pair.values.cwiseAbs().maxCoeff();
  const Matrix& e = instance.e.dense();
  const Matrix& u_hat = pair_hat.vectors;

  Matrix cur = pair.vectors * pair.values.asDiagonal() * (pair.vectors.transpose() * u_hat);
  Vector scale = pair_hat.values.cwiseInverse();
  const Vector step = scale;
  rep.approximation = Matrix::Zero(u_hat.rows(), u_hat.cols());
  for (int k = 0; k <= order; ++k) {
    Matrix term = cur * scale.asDiagonal();
    rep.approximation += term;
    rep.term_norms.push_back(spectral_norm(term));
    rep.error_norms.push_back(spectral_norm(rep.approximation - u_hat));
    rep.tail_bounds.push_back(std::pow(rep.contraction, k + 1) * lam_norm * inv_hat / (1.0 - rep.contraction));
    rep.terms.push_back(std::move(term));
    if (k < order) {
      cur = e * cur;
      scale = scale.cwiseProduct(step);
    }
  }
  return rep;
}

ConcentrationReport check_assumption4(const SymmetricMatrix& e, const MatrixRef& u, double rho, double xi,
                                      std::optional<int> k_max, int threads) {
  const Eigen::Index n = e.order();
  if (u.rows() != n || u.cols() < 1) throw InvalidInput("check_assumption4: U must be n x r");
  if (!(xi > 0.0)) throw InvalidInput("check_assumption4: xi must be positive");

  ConcentrationReport rep;
  rep.n = n;
  rep.rho = rho;
  rep.xi = xi;
  rep.k_n = k_of_n(n, rho);
  rep.k_max = k_max.value_or(rep.k_n + 1);
  if (rep.k_max < 1) throw InvalidInput("check_assumption4: k_max must be at least 1");

  const Eigen::Index r = u.cols();
  const auto powers = kernels::parallel::power_sequence(e.dense(), u, rep.k_max, threads);
  const double log_n = std::log(static_cast<double>(n));
  const double scale = static_cast<double>(n) * rho;
  const Vector u_inf = u.cwiseAbs().colwise().maxCoeff().transpose();

  rep.max_abs.resize(rep.k_max, r);
  rep.ratios.resize(rep.k_max, r);
  for (int k = 1; k <= rep.k_max; ++k) {
    const double envelope = std::pow(scale, 0.5 * k) * std::pow(log_n, k * xi);
    for (Eigen::Index j = 0; j < r; ++j) {
      const double peak = powers[static_cast<size_t>(k - 1)].col(j).cwiseAbs().maxCoeff();
      rep.max_abs(k - 1, j) = peak;
      const double ratio = peak == 0.0 ? 0.0 : peak / (envelope * u_inf(j));
      rep.ratios(k - 1, j) = ratio;
      rep.certified_c_e = std::max(rep.certified_c_e, std::pow(ratio, 2.0 / k));
    }
  }
  return rep;
}

LeadingTerm first_order_leading(const ModelInstance& instance, const SpectralPair& pair, const MatrixRef& u_hat,
                                const MatrixRef& w) {
  const Eigen::Index r = pair.rank();
  if (pair.dim() != instance.m.order() || u_hat.rows() != pair.dim() || u_hat.cols() != r || w.rows() != r ||
      w.cols() != r) {
    throw InvalidInput("first_order_leading: shape mismatch");
  }
  check_invertible(pair.values, "first_order_leading: Lambda");
  const Vector lam_inv = pair.values.cwiseInverse();
  LeadingTerm out;
  out.leading = instance.e.dense() * pair.vectors * lam_inv.asDiagonal() * w;
  out.linearized = instance.m_hat.dense() * pair.vectors * lam_inv.asDiagonal() * w;
  out.leading_two_to_inf = two_to_inf_norm(out.leading);
  out.linearized_gap_two_to_inf = two_to_inf_norm(u_hat - out.linearized);
  return out;
}

double phi_benchmark(Eigen::Index n, double lambda_r) {
  if (!(lambda_r > 0.0)) throw InvalidInput("phi_benchmark: lambda_r must be positive");
  if (n < 1) throw InvalidInput("phi_benchmark: n must be positive");
  const double nn = static_cast<double>(n);
  return std::log(nn) / std::sqrt(lambda_r * nn);
}

double davis_kahan_bound(double noise_norm, const SpectralPair& pair, const SpectralPair& pair_hat) {
  const double gap = std::min(pair.values.cwiseAbs().minCoeff(), pair_hat.values.cwiseAbs().minCoeff());
  return std::sqrt(2.0) * noise_norm / gap;
}

double two_to_inf_rate(const SpectralPair& pair, double rho, double xi) {
  const double n = static_cast<double>(pair.dim());
  const double coherence = std::sqrt(static_cast<double>(pair.rank())) * std::pow(std::log(n), xi) *
                           two_to_inf_norm(pair.vectors);
  return std::min(coherence, 1.0) / std::sqrt(n * rho);
}

}  // namespace specnoise
