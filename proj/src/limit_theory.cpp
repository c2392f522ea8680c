#include "specnoise/limit_theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "specnoise/error.hpp"

namespace specnoise {

namespace {

constexpr double kSpdFloor = 1e-12;

double min_eigenvalue(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

XiEstimate finish_xi(Matrix xi, XiSource source) {
  xi = 0.5 * (xi + xi.transpose());
  XiEstimate out;
  out.min_eigenvalue = min_eigenvalue(xi);
  if (!(out.min_eigenvalue > kSpdFloor)) {
    throw InvalidInput("Xi is singular (smallest eigenvalue " + std::to_string(out.min_eigenvalue) + ")");
  }
  out.xi = std::move(xi);
  out.source = source;
  return out;
}

}  // namespace

XiEstimate xi_limit(const SbmSpec& spec, const LatentPositions& latent) {
  validate(spec);
  if (latent.nu.rows() != spec.blocks()) throw InvalidInput("xi_limit: latent positions do not match B");
  return finish_xi(latent.nu.transpose() * spec.pi.asDiagonal() * latent.nu, XiSource::analytic);
}

XiEstimate xi_limit(const SpikeSpec& spec) {
  const Matrix x = spike_latent(spec);
  XiEstimate out = xi_plug_in(x);
  out.source = spec.signal ? XiSource::analytic : XiSource::plug_in;
  return out;
}

XiEstimate xi_plug_in(const MatrixRef& x) {
  if (x.rows() == 0) throw InvalidInput("xi_plug_in: empty X");
  return finish_xi((x.transpose() * x) / static_cast<double>(x.rows()), XiSource::plug_in);
}

Matrix gamma_sbm(const SbmSpec& spec, const LatentPositions& latent, int block) {
  validate(spec);
  if (block < 0 || block >= spec.blocks()) throw InvalidInput("gamma_sbm: block out of range");
  const Eigen::Index r = latent.nu.cols();
  Matrix g = Matrix::Zero(r, r);
  for (Eigen::Index k = 0; k < spec.blocks(); ++k) {
    const double p = spec.b(block, k);
    const double weight = spec.pi(k) * p * (1.0 - spec.rho * p);
    g += weight * latent.nu.row(k).transpose() * latent.nu.row(k);
  }
  return g;
}

Matrix gamma_homogeneous(const MatrixRef& xi, double variance, double rho) {
  if (!(variance >= 0.0)) throw InvalidInput("gamma_homogeneous: variance must be nonnegative");
  if (!(rho > 0.0 && rho <= 1.0)) throw InvalidInput("gamma_homogeneous: rho outside (0, 1]");
  return (variance / rho) * xi;
}

Matrix gamma_plug_in(const MatrixRef& x, const NoiseSpec& noise, Eigen::Index row, double rho) {
  const Eigen::Index n = x.rows();
  if (row < 0 || row >= n) throw InvalidInput("gamma_plug_in: row out of range");
  if (noise.variance_profile && noise.variance_profile->order() != n) {
    throw InvalidInput("gamma_plug_in: variance profile order differs from n");
  }
  Matrix g = Matrix::Zero(x.cols(), x.cols());
  for (Eigen::Index j = 0; j < n; ++j) {
    g += noise_variance(noise, row, j) * x.row(j).transpose() * x.row(j);
  }
  return g / (static_cast<double>(n) * rho);
}

Matrix spd_power(const MatrixRef& s, double power) {
  if (s.rows() != s.cols() || s.rows() == 0) throw InvalidInput("spd_power: matrix must be square");
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, s.cwiseAbs().maxCoeff())) {
    throw InvalidInput("spd_power: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
  if (!(es.eigenvalues()(0) > kSpdFloor)) {
    throw InvalidInput("spd_power: matrix is not positive definite (smallest eigenvalue " +
                       std::to_string(es.eigenvalues()(0)) + ")");
  }
  const Vector scaled = es.eigenvalues().array().pow(power).matrix();
  return es.eigenvectors() * scaled.asDiagonal() * es.eigenvectors().transpose();
}

Matrix sigma_i(const MatrixRef& xi, const MatrixRef& gamma) {
  if (gamma.rows() != xi.rows() || gamma.cols() != xi.cols()) throw InvalidInput("sigma_i: shape mismatch");
  const Matrix root = spd_power(xi, -1.5);
  const Matrix s = root * gamma * root;
  return 0.5 * (s + s.transpose());
}

LimitCovariance limit_covariance(const SbmSpec& spec, const LatentPositions& latent) {
  LimitCovariance out;
  out.xi = xi_limit(spec, latent);
  for (int k = 0; k < spec.blocks(); ++k) {
    out.gamma.push_back(gamma_sbm(spec, latent, k));
    out.sigma.push_back(sigma_i(out.xi.xi, out.gamma.back()));
  }
  return out;
}

LimitCovariance limit_covariance(const SpikeSpec& spec) {
  LimitCovariance out;
  out.xi = xi_limit(spec);
  out.gamma.push_back(gamma_homogeneous(out.xi.xi, noise_variance(spec.noise), spec.rho));
  out.sigma.push_back(sigma_i(out.xi.xi, out.gamma.back()));
  return out;
}

Matrix fluctuation_matrix(const SpectralPair& pair, const SpectralPair& pair_hat, const AlignmentPair& alignment,
                          double rho) {
  if (pair.dim() != pair_hat.dim() || pair.rank() != pair_hat.rank()) {
    throw InvalidInput("fluctuation_matrix: frame shapes differ");
  }
  const double scale = static_cast<double>(pair.dim()) * std::sqrt(rho);
  return scale * (pair_hat.vectors * alignment.w.transpose() - pair.vectors) * alignment.w_x;
}

Matrix scaled_rows(const SpectralPair& pair_hat, const AlignmentPair& alignment, double rho) {
  const double scale = static_cast<double>(pair_hat.dim()) * std::sqrt(rho);
  return scale * pair_hat.vectors * alignment.w.transpose() * alignment.w_x;
}

Matrix scaled_centers(const SpectralPair& pair, const AlignmentPair& alignment, double rho) {
  const double scale = static_cast<double>(pair.dim()) * std::sqrt(rho);
  return scale * pair.vectors * alignment.w_x;
}

std::vector<FluctuationSample> fluctuation_rows(const SpectralPair& pair, const SpectralPair& pair_hat,
                                                const AlignmentPair& alignment, double rho,
                                                std::span<const int> blocks, std::uint64_t replicate,
                                                std::uint64_t seed) {
  if (!blocks.empty() && static_cast<Eigen::Index>(blocks.size()) != pair.dim()) {
    throw InvalidInput("fluctuation_rows: one block label per row required");
  }
  const Matrix v = fluctuation_matrix(pair, pair_hat, alignment, rho);
  std::vector<FluctuationSample> out;
  out.reserve(static_cast<size_t>(v.rows()));
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    if (!v.row(i).allFinite()) throw InvalidInput("fluctuation_rows: non-finite fluctuation");
    out.push_back({i, blocks.empty() ? 0 : blocks[static_cast<size_t>(i)], v.row(i).transpose(), replicate, seed});
  }
  return out;
}

void CovarianceAccumulator::add(const Eigen::Ref<const Vector>& x) {
  if (count_ == 0 && mean_.size() == 0) {
    mean_ = Vector::Zero(x.size());
    m2_ = Matrix::Zero(x.size(), x.size());
  }
  if (x.size() != mean_.size()) throw InvalidInput("CovarianceAccumulator: dimension mismatch");
  ++count_;
  const Vector delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (x - mean_).transpose();
}

GroupCovariance CovarianceAccumulator::result() const {
  if (count_ < 2) throw InvalidInput("covariance needs at least two samples");
  GroupCovariance g;
  g.count = count_;
  g.mean = mean_;
  g.covariance = m2_ / static_cast<double>(count_ - 1);
  g.covariance = 0.5 * (g.covariance + g.covariance.transpose());
  return g;
}

std::map<int, GroupCovariance> empirical_covariance(std::span<const FluctuationSample> samples) {
  if (samples.empty()) throw InvalidInput("empirical_covariance: no samples");
  std::map<int, std::vector<const FluctuationSample*>> groups;
  for (const auto& s : samples) groups[s.block].push_back(&s);

  std::map<int, GroupCovariance> out;
  for (const auto& [block, members] : groups) {
    if (members.size() < 2) {
      throw InvalidInput("empirical_covariance: block " + std::to_string(block) + " has fewer than two samples");
    }
    const Eigen::Index r = members.front()->v.size();
    Vector mean = Vector::Zero(r);
    for (const auto* s : members) mean += s->v;
    mean /= static_cast<double>(members.size());
    Matrix cov = Matrix::Zero(r, r);
    for (const auto* s : members) {
      const Vector d = s->v - mean;
      cov += d * d.transpose();
    }
    cov /= static_cast<double>(members.size() - 1);
    out[block] = GroupCovariance{members.size(), mean, cov};
  }
  return out;
}

double chi2_2df_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput("chi2_2df_quantile: p must lie in (0, 1)");
  return -2.0 * std::log1p(-p);
}

Ellipse ellipse_level_95(const MatrixRef& sigma, const Eigen::Vector2d& center) {
  if (sigma.rows() != 2 || sigma.cols() != 2) throw InvalidInput("ellipse_level_95: Sigma must be 2 x 2");
  if (std::abs(sigma(0, 1) - sigma(1, 0)) > 1e-12 * std::max(1.0, sigma.cwiseAbs().maxCoeff())) {
    throw InvalidInput("ellipse_level_95: Sigma is not symmetric");
  }
  const Eigen::Matrix2d s = 0.5 * (sigma + sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(s);
  if (!(es.eigenvalues()(0) > 0.0)) throw InvalidInput("ellipse_level_95: Sigma is not positive definite");

  Ellipse out;
  out.center = center;
  out.level = chi2_2df_quantile(0.95);
  out.semi_major = std::sqrt(out.level * es.eigenvalues()(1));
  out.semi_minor = std::sqrt(out.level * es.eigenvalues()(0));
  const Eigen::Vector2d major = es.eigenvectors().col(1);
  double angle = std::atan2(major(1), major(0));
  if (angle <= -std::numbers::pi / 2) angle += std::numbers::pi;
  if (angle > std::numbers::pi / 2) angle -= std::numbers::pi;
  out.angle = angle;
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

NormalityReport normality_diagnostics(std::span<const double> samples, double mean, double variance) {
  if (samples.size() < 50) throw InvalidInput("normality_diagnostics: need at least 50 samples");
  if (!(variance > 0.0)) throw InvalidInput("normality_diagnostics: target variance must be positive");

  NormalityReport rep;
  rep.size = samples.size();
  const double m = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double x : samples) sum += x;
  rep.mean = sum / m;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : samples) {
    const double d = x - rep.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  if (!(m2 > 0.0)) throw InvalidInput("normality_diagnostics: sample has zero variance");
  rep.variance = m2 / (m - 1.0);
  const double pop2 = m2 / m;
  rep.skewness = (m3 / m) / std::pow(pop2, 1.5);
  rep.excess_kurtosis = (m4 / m) / (pop2 * pop2) - 3.0;

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = std::sqrt(variance);
  double d = 0.0;
  for (size_t i = 0; i < sorted.size(); ++i) {
    const double f = normal_cdf((sorted[i] - mean) / sd);
    d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
  }
  rep.ks_statistic = d;
  return rep;
}

double ks_critical_value(std::size_t m, double alpha) {
  if (m == 0) throw InvalidInput("ks_critical_value: empty sample");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("ks_critical_value: alpha must lie in (0, 1)");
  return std::sqrt(-std::log(alpha / 2.0) / 2.0) / std::sqrt(static_cast<double>(m));
}

}  // namespace specnoise
