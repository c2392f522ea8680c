#include "specnoise/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "specnoise/error.hpp"
#include "specnoise/rng.hpp"

namespace specnoise {

namespace {

constexpr double kRankTolerance = 1e-10;

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void check_rho(double rho, const char* where) {
  if (!(rho > 0.0 && rho <= 1.0)) {
    throw InvalidInput(std::string(where) + ": rho = " + num(rho) + " outside (0, 1]");
  }
}

}  // namespace

void validate(const SbmSpec& spec) {
  const Eigen::Index k = spec.b.rows();
  if (k < 1 || spec.b.cols() != k) throw InvalidInput("SbmSpec: B must be a non-empty square matrix");
  if (!spec.b.allFinite()) throw InvalidInput("SbmSpec: B has non-finite entries");
  if ((spec.b - spec.b.transpose()).cwiseAbs().maxCoeff() > 0.0) {
    throw InvalidInput("SbmSpec: B is not symmetric");
  }
  if (spec.b.minCoeff() < 0.0 || spec.b.maxCoeff() > 1.0) {
    throw InvalidInput("SbmSpec: B entries must lie in [0, 1]");
  }
  if (spec.pi.size() != k) throw InvalidInput("SbmSpec: pi must have one entry per block");
  if (!spec.pi.allFinite() || spec.pi.minCoeff() <= 0.0) {
    throw InvalidInput("SbmSpec: block proportions must be positive");
  }
  if (std::abs(spec.pi.sum() - 1.0) > 1e-12) {
    throw InvalidInput("SbmSpec: block proportions sum to " + num(spec.pi.sum()) + ", not 1");
  }
  if (spec.n < 1) throw InvalidInput("SbmSpec: n must be positive");
  check_rho(spec.rho, "SbmSpec");
  Eigen::Index total = 0;
  for (Eigen::Index j = 0; j < k; ++j) total += std::llround(static_cast<double>(spec.n) * spec.pi(j));
  if (total != spec.n) {
    throw InvalidInput("SbmSpec: rounded block sizes sum to " + std::to_string(total) + ", not n = " +
                       std::to_string(spec.n));
  }
}

std::vector<Eigen::Index> block_sizes(const SbmSpec& spec) {
  validate(spec);
  std::vector<Eigen::Index> sizes;
  for (Eigen::Index j = 0; j < spec.blocks(); ++j) {
    sizes.push_back(std::llround(static_cast<double>(spec.n) * spec.pi(j)));
  }
  return sizes;
}

std::vector<int> block_memberships(const SbmSpec& spec) {
  const auto sizes = block_sizes(spec);
  std::vector<int> g;
  g.reserve(static_cast<size_t>(spec.n));
  for (size_t k = 0; k < sizes.size(); ++k) g.insert(g.end(), static_cast<size_t>(sizes[k]), static_cast<int>(k));
  return g;
}

LatentPositions latent_from_B(const Matrix& b, std::span<const int> memberships, LatentFactor factor) {
  const Eigen::Index k = b.rows();
  if (k < 1 || b.cols() != k || !b.allFinite()) throw InvalidInput("latent_from_B: B must be finite and square");
  if ((b - b.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw InvalidInput("latent_from_B: B is not symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix> es(b);
  const Vector asc = es.eigenvalues();
  const double norm = asc.cwiseAbs().maxCoeff();
  const double tol = kRankTolerance * norm;
  if (asc(0) < -tol) {
    throw InvalidInput("latent_from_B: B is not positive semidefinite (smallest eigenvalue " + num(asc(0)) + ")");
  }

  LatentPositions out;
  out.block_eigenvalues = asc.reverse();
  out.rank = (asc.array() > tol).count();
  if (out.rank == 0) throw InvalidInput("latent_from_B: B has rank zero");

  if (factor == LatentFactor::automatic) {
    factor = out.rank == k ? LatentFactor::cholesky : LatentFactor::eigen;
  }
  if (factor == LatentFactor::cholesky) {
    if (out.rank != k) throw InvalidInput("latent_from_B: Cholesky factor needs B positive definite");
    Eigen::LLT<Matrix> llt(b);
    if (llt.info() != Eigen::Success) throw InvalidInput("latent_from_B: Cholesky factorization failed");
    out.nu = llt.matrixL();
  } else {
    Matrix v = es.eigenvectors().rowwise().reverse().leftCols(out.rank);
    normalize_signs(v);
    out.nu = v * out.block_eigenvalues.head(out.rank).cwiseSqrt().asDiagonal();
  }
  out.factor = factor;

  out.x.resize(static_cast<Eigen::Index>(memberships.size()), out.rank);
  for (size_t i = 0; i < memberships.size(); ++i) {
    const int g = memberships[i];
    if (g < 0 || g >= k) throw InvalidInput("latent_from_B: membership label out of range");
    out.x.row(static_cast<Eigen::Index>(i)) = out.nu.row(g);
  }
  return out;
}

SbmPopulation sbm_population(const SbmSpec& spec, bool with_latent) {
  validate(spec);
  SbmPopulation out;
  out.block_sizes = block_sizes(spec);
  out.memberships = block_memberships(spec);

  Matrix p(spec.n, spec.n);
  for (Eigen::Index j = 0; j < spec.n; ++j) {
    const int gj = out.memberships[static_cast<size_t>(j)];
    for (Eigen::Index i = 0; i < spec.n; ++i) {
      p(i, j) = spec.rho * spec.b(out.memberships[static_cast<size_t>(i)], gj);
    }
  }
  out.p = SymmetricMatrix::from_upper(std::move(p));
  if (with_latent) out.latent = latent_from_B(spec.b, out.memberships);
  return out;
}

ModelInstance make_instance(SymmetricMatrix m, SymmetricMatrix e, Provenance provenance) {
  if (m.order() != e.order()) throw InvalidInput("make_instance: M and E differ in order");
  ModelInstance out;
  out.m_hat = m + e;
  out.m = std::move(m);
  out.e = std::move(e);
  out.seed = provenance.seed;
  out.provenance = std::move(provenance);
  return out;
}

ModelInstance sbm_sample(const SymmetricMatrix& p, std::uint64_t seed, bool hollow_diagonal) {
  const Eigen::Index n = p.order();
  if (!p.all_finite() || (n > 0 && (p.dense().minCoeff() < 0.0 || p.dense().maxCoeff() > 1.0))) {
    throw InvalidInput("sbm_sample: P entries must lie in [0, 1]");
  }
  Rng rng(seed);
  Matrix e(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double pij = p(i, j);
      double a = 0.0;
      if (i != j || !hollow_diagonal) a = rng.bernoulli(pij) ? 1.0 : 0.0;
      e(i, j) = a - pij;
    }
  }
  Provenance prov{"sbm", seed, 1.0, hollow_diagonal ? "hollow diagonal" : "bernoulli diagonal"};
  return make_instance(p, SymmetricMatrix::from_upper(std::move(e)), std::move(prov));
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::laplace: return "laplace";
    case NoiseKind::uniform: return "uniform";
    case NoiseKind::centered_bernoulli: return "centered-bernoulli";
  }
  return "unknown";
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "gaussian") return NoiseKind::gaussian;
  if (name == "laplace") return NoiseKind::laplace;
  if (name == "uniform") return NoiseKind::uniform;
  if (name == "centered-bernoulli") return NoiseKind::centered_bernoulli;
  throw InvalidInput("unknown noise kind '" + name + "'");
}

namespace {

void check_noise(const NoiseSpec& noise) {
  if (!std::isfinite(noise.scale)) throw InvalidInput("noise: scale must be finite");
  switch (noise.kind) {
    case NoiseKind::gaussian:
      if (noise.scale < 0.0) throw InvalidInput("noise: gaussian variance must be nonnegative");
      break;
    case NoiseKind::laplace:
    case NoiseKind::uniform:
      if (noise.scale <= 0.0) throw InvalidInput("noise: " + to_string(noise.kind) + " scale must be positive");
      break;
    case NoiseKind::centered_bernoulli:
      if (noise.scale <= 0.0 || noise.scale >= 1.0) throw InvalidInput("noise: bernoulli p must lie in (0, 1)");
      break;
  }
  if (noise.variance_profile) {
    if (noise.kind != NoiseKind::gaussian) throw InvalidInput("noise: variance profiles apply to gaussian noise only");
    if (noise.variance_profile->order() > 0 && noise.variance_profile->dense().minCoeff() < 0.0) {
      throw InvalidInput("noise: variance profile has negative entries");
    }
  }
}

}  // namespace

double noise_variance(const NoiseSpec& noise) {
  check_noise(noise);
  if (noise.variance_profile) throw InvalidInput("noise_variance: variance is not homogeneous");
  switch (noise.kind) {
    case NoiseKind::gaussian: return noise.scale;
    case NoiseKind::laplace: return 2.0 * noise.scale * noise.scale;
    case NoiseKind::uniform: return noise.scale * noise.scale / 3.0;
    case NoiseKind::centered_bernoulli: return noise.scale * (1.0 - noise.scale);
  }
  return 0.0;
}

double noise_variance(const NoiseSpec& noise, Eigen::Index i, Eigen::Index j) {
  if (noise.variance_profile) return (*noise.variance_profile)(i, j);
  return noise_variance(noise);
}

SymmetricMatrix noise_sample(const NoiseSpec& noise, Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("noise_sample: n must be positive");
  check_noise(noise);
  if (noise.variance_profile && noise.variance_profile->order() != n) {
    throw InvalidInput("noise_sample: variance profile order differs from n");
  }
  Rng rng(seed);
  Matrix e(n, n);
  const double sd = std::sqrt(noise.kind == NoiseKind::gaussian ? noise.scale : 0.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      double v = 0.0;
      switch (noise.kind) {
        case NoiseKind::gaussian: {
          const double s = noise.variance_profile ? std::sqrt((*noise.variance_profile)(i, j)) : sd;
          v = s * rng.normal();
          break;
        }
        case NoiseKind::laplace: v = rng.laplace(noise.scale); break;
        case NoiseKind::uniform: v = noise.scale * (2.0 * rng.uniform() - 1.0); break;
        case NoiseKind::centered_bernoulli:
          v = (rng.bernoulli(noise.scale) ? 1.0 : 0.0) - noise.scale;
          break;
      }
      e(i, j) = v;
    }
  }
  return SymmetricMatrix::from_upper(std::move(e));
}

double latent_condition(const MatrixRef& x) {
  if (x.rows() == 0 || x.cols() == 0) throw InvalidInput("latent_condition: empty X");
  const Matrix gram = (x.transpose() * x) / static_cast<double>(x.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(es.eigenvalues().size() - 1);
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

void validate(const SpikeSpec& spec) {
  if (spec.n < 1) throw InvalidInput("SpikeSpec: n must be positive");
  if (spec.signal.has_value() == spec.latent.has_value()) {
    throw InvalidInput("SpikeSpec: give exactly one of an eigenpair signal or latent positions");
  }
  check_rho(spec.rho, "SpikeSpec");
  check_noise(spec.noise);
  if (spec.signal) {
    const auto& s = *spec.signal;
    if (s.dim() != spec.n || s.vectors.cols() != s.rank() || s.rank() < 1) {
      throw InvalidInput("SpikeSpec: signal frame must be n x r with r eigenvalues");
    }
    if (s.orthogonality_defect() > 1e-10) throw InvalidInput("SpikeSpec: signal frame is not orthonormal");
    for (Eigen::Index k = 0; k < s.rank(); ++k) {
      if (s.values(k) == 0.0) throw InvalidInput("SpikeSpec: signal eigenvalues must be nonzero");
      if (k > 0 && std::abs(s.values(k)) > std::abs(s.values(k - 1))) {
        throw InvalidInput("SpikeSpec: signal eigenvalues must be ordered by descending magnitude");
      }
    }
  } else {
    const auto& x = *spec.latent;
    if (x.rows() != spec.n || x.cols() < 1) throw InvalidInput("SpikeSpec: X must be n x r");
    const double cond = latent_condition(x);
    if (!std::isfinite(cond) || cond > 1e12) {
      throw InvalidInput("SpikeSpec: n^{-1} X^T X is singular (condition number " + num(cond) + ")");
    }
  }
}

SpectralPair spike_signal(const SpikeSpec& spec) {
  validate(spec);
  if (spec.signal) return *spec.signal;
  const Matrix& x = *spec.latent;
  return top_r(SymmetricMatrix::from_upper(spec.rho * (x * x.transpose())), x.cols());
}

Matrix spike_latent(const SpikeSpec& spec) {
  validate(spec);
  if (spec.latent) return *spec.latent;
  const auto& s = *spec.signal;
  if (s.values.minCoeff() <= 0.0) throw InvalidInput("spike_latent: latent positions need Lambda > 0");
  return (s.vectors * s.values.cwiseSqrt().asDiagonal()) / std::sqrt(spec.rho);
}

ModelInstance spike_model(const SpikeSpec& spec, std::uint64_t seed) {
  validate(spec);
  Matrix m;
  if (spec.signal) {
    m = spec.signal->vectors * spec.signal->values.asDiagonal() * spec.signal->vectors.transpose();
  } else {
    m = spec.rho * (*spec.latent * spec.latent->transpose());
  }
  SymmetricMatrix e = noise_sample(spec.noise, spec.n, seed);
  Provenance prov{"spike", seed, spec.rho, to_string(spec.noise.kind)};
  return make_instance(SymmetricMatrix::from_upper(std::move(m)), std::move(e), std::move(prov));
}

SpikeSpec constant_spike(Eigen::Index n, double lambda, NoiseSpec noise) {
  if (n < 1) throw InvalidInput("constant_spike: n must be positive");
  SpikeSpec spec;
  spec.n = n;
  SpectralPair s;
  s.vectors = Matrix::Constant(n, 1, 1.0 / std::sqrt(static_cast<double>(n)));
  s.values = Vector::Constant(1, lambda);
  spec.signal = std::move(s);
  spec.noise = std::move(noise);
  return spec;
}

SpikeSpec sign_split_spike(Eigen::Index n, double lambda, NoiseSpec noise) {
  if (n < 2 || n % 2 != 0) throw InvalidInput("sign_split_spike: n must be even");
  SpikeSpec spec;
  spec.n = n;
  const double h = 1.0 / std::sqrt(static_cast<double>(n));
  SpectralPair s;
  s.vectors.resize(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.vectors(i, 0) = h;
    s.vectors(i, 1) = i < n / 2 ? h : -h;
  }
  s.values = Vector::Constant(2, lambda);
  spec.signal = std::move(s);
  spec.noise = std::move(noise);
  return spec;
}

SbmSpec three_block_spec(Eigen::Index n, double rho) {
  SbmSpec spec;
  spec.b = Matrix::Constant(3, 3, 0.3);
  spec.b.diagonal().setConstant(0.5);
  spec.pi = Vector::Constant(3, 1.0 / 3.0);
  spec.n = n;
  spec.rho = rho;
  return spec;
}

SbmSpec two_block_spec(Eigen::Index n, double rho) {
  SbmSpec spec;
  spec.b.resize(2, 2);
  spec.b << 0.5, 0.3, 0.3, 0.3;
  spec.pi.resize(2);
  spec.pi << 0.4, 0.6;
  spec.n = n;
  spec.rho = rho;
  return spec;
}

}  // namespace specnoise
