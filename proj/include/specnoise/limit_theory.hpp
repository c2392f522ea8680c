#pragma once

// Row-wise fluctuation limit theory: Xi, Gamma_i and
// Sigma_i = Xi^{-3/2} Gamma_i Xi^{-3/2}, the scaled fluctuation vectors
// n rho^{1/2} W_X^T (W U_hat_i - U_i), and their empirical summaries.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "specnoise/alignment.hpp"
#include "specnoise/linalg.hpp"
#include "specnoise/models.hpp"

namespace specnoise {

enum class XiSource { analytic, plug_in };

struct XiEstimate {
  Matrix xi;
  XiSource source = XiSource::analytic;
  double min_eigenvalue = 0.0;
};

/// sum_k pi_k nu_k nu_k^T.
XiEstimate xi_limit(const SbmSpec& spec, const LatentPositions& latent);

/// For an eigenpair signal the rows of X = rho^{-1/2} U Lambda^{1/2} are
/// fixed by construction and n^{-1} X^T X is reported as analytic; explicit
/// latent positions give the finite-n plug-in.
XiEstimate xi_limit(const SpikeSpec& spec);

/// n^{-1} X^T X, flagged as a plug-in.
XiEstimate xi_plug_in(const MatrixRef& x);

/// Block-i limit of (n rho)^{-1} sum_j Var(E_ij) X_j X_j^T for Bernoulli
/// noise: sum_k pi_k B_ik (1 - rho B_ik) nu_k nu_k^T.
Matrix gamma_sbm(const SbmSpec& spec, const LatentPositions& latent, int block);

/// Homogeneous variance sigma^2: Gamma = (sigma^2 / rho) Xi.
Matrix gamma_homogeneous(const MatrixRef& xi, double variance, double rho);

/// (n rho)^{-1} sum_j sigma_ij^2 X_j X_j^T for row i.
Matrix gamma_plug_in(const MatrixRef& x, const NoiseSpec& noise, Eigen::Index row, double rho);

/// Xi^{-3/2} Gamma Xi^{-3/2}; Xi must be symmetric positive definite.
Matrix sigma_i(const MatrixRef& xi, const MatrixRef& gamma);

/// V diag(lambda^p) V^T for symmetric positive definite S.
Matrix spd_power(const MatrixRef& s, double power);

struct LimitCovariance {
  XiEstimate xi;
  std::vector<Matrix> gamma;  // one per block (a single entry for homogeneous noise)
  std::vector<Matrix> sigma;
};

LimitCovariance limit_covariance(const SbmSpec& spec, const LatentPositions& latent);
LimitCovariance limit_covariance(const SpikeSpec& spec);

struct FluctuationSample {
  Eigen::Index row = 0;
  int block = 0;
  Vector v;
  std::uint64_t replicate = 0;
  std::uint64_t seed = 0;
};

/// n x r matrix whose row i is n rho^{1/2} W_X^T (W U_hat_i - U_i).
Matrix fluctuation_matrix(const SpectralPair& pair, const SpectralPair& pair_hat,
                          const AlignmentPair& alignment, double rho);

/// Uncentered rows n rho^{1/2} W_X^T W U_hat_i.
Matrix scaled_rows(const SpectralPair& pair_hat, const AlignmentPair& alignment, double rho);

/// Centers n rho^{1/2} W_X^T U_i.
Matrix scaled_centers(const SpectralPair& pair, const AlignmentPair& alignment, double rho);

/// One sample per row; `blocks` may be empty (every row in block 0).
std::vector<FluctuationSample> fluctuation_rows(const SpectralPair& pair, const SpectralPair& pair_hat,
                                                const AlignmentPair& alignment, double rho,
                                                std::span<const int> blocks, std::uint64_t replicate = 0,
                                                std::uint64_t seed = 0);

struct GroupCovariance {
  std::size_t count = 0;
  Vector mean;
  Matrix covariance;  // unbiased
};

/// Streaming mean / covariance (Welford updates in insertion order).
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(Eigen::Index dim = 0) : mean_(Vector::Zero(dim)), m2_(Matrix::Zero(dim, dim)) {}

  void add(const Eigen::Ref<const Vector>& x);
  std::size_t count() const { return count_; }
  GroupCovariance result() const;

 private:
  std::size_t count_ = 0;
  Vector mean_;
  Matrix m2_;
};

/// Per-block unbiased covariance pooled over rows and replicates.
/// Throws InvalidInput for a group with fewer than two samples.
std::map<int, GroupCovariance> empirical_covariance(std::span<const FluctuationSample> samples);

/// Quantile of the chi-square distribution with two degrees of freedom.
double chi2_2df_quantile(double p);

struct Ellipse {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double angle = 0.0;  // radians, major axis against the first coordinate axis, in (-pi/2, pi/2]
  double level = 0.0;  // q with x^T Sigma^{-1} x = q
};

/// 95% level curve {x : (x - c)^T Sigma^{-1} (x - c) = q}, q = 5.99146.
Ellipse ellipse_level_95(const MatrixRef& sigma, const Eigen::Vector2d& center = Eigen::Vector2d::Zero());

struct NormalityReport {
  std::size_t size = 0;
  double ks_statistic = 0.0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

/// One-sample Kolmogorov-Smirnov statistic against N(mean, variance) plus
/// sample moments. Needs at least 50 samples with nonzero spread.
NormalityReport normality_diagnostics(std::span<const double> samples, double mean = 0.0, double variance = 1.0);

/// Asymptotic KS critical value sqrt(-log(alpha / 2) / 2) / sqrt(m).
double ks_critical_value(std::size_t m, double alpha = 0.01);

double normal_cdf(double x);

}  // namespace specnoise
