#pragma once

// Signal and noise generators: stochastic block models, spiked low-rank
// models and symmetric noise ensembles under a sparsity factor rho.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specnoise/linalg.hpp"

namespace specnoise {

/// Stochastic block model parameters.
struct SbmSpec {
  Matrix b;   // K x K block edge probabilities, symmetric, entries in [0, 1]
  Vector pi;  // block proportions, positive, sum to 1
  Eigen::Index n = 0;
  double rho = 1.0;
  // Sample A_ii = 0 instead of A_ii ~ Bernoulli(P_ii). Off by default so
  // that E = A - P is exactly centered.
  bool hollow_diagonal = false;

  // Asymptotic-regime constants (c_1 n^{-1} log^{c_2} n <= rho <= c_rho).
  // Documentation only: no finite-n computation reads them.
  double c1 = 0.0;
  double c2 = 0.0;
  double c_rho = 1.0;

  Eigen::Index blocks() const { return b.rows(); }
};

/// Throws InvalidInput naming the violated invariant.
void validate(const SbmSpec& spec);

/// Contiguous block sizes round(n * pi_k); they must sum to n.
std::vector<Eigen::Index> block_sizes(const SbmSpec& spec);

/// Block label of each vertex, contiguous in vertex order.
std::vector<int> block_memberships(const SbmSpec& spec);

enum class LatentFactor {
  automatic,  // cholesky when B is positive definite, eigen otherwise
  cholesky,   // B = L L^T, nu_k = row k of L
  eigen,      // B = (V D^{1/2})(V D^{1/2})^T over positive eigenvalues
};

struct LatentPositions {
  Matrix x;                  // n x r, row i = nu_{g(i)}
  Matrix nu;                 // K x r block latent positions
  Vector block_eigenvalues;  // eigenvalues of B, descending
  Eigen::Index rank = 0;
  LatentFactor factor = LatentFactor::automatic;  // factor actually used
};

/// Latent positions with B = N N^T. Eigenvalues below 1e-10 ||B|| count as
/// zero. Throws InvalidInput if B is not positive semidefinite.
LatentPositions latent_from_B(const Matrix& b, std::span<const int> memberships,
                              LatentFactor factor = LatentFactor::automatic);

struct SbmPopulation {
  SymmetricMatrix p;
  std::vector<int> memberships;
  std::vector<Eigen::Index> block_sizes;
  std::optional<LatentPositions> latent;
};

/// P_ij = rho * B_{g(i) g(j)}; latent positions on request (needs B PSD).
SbmPopulation sbm_population(const SbmSpec& spec, bool with_latent = true);

struct Provenance {
  std::string model;  // "sbm", "spike", "noise"
  std::uint64_t seed = 0;
  double rho = 1.0;
  std::string detail;
};

/// (M, E, M_hat = M + E) with provenance. M_hat equals M + E entrywise.
struct ModelInstance {
  SymmetricMatrix m;
  SymmetricMatrix e;
  SymmetricMatrix m_hat;
  std::uint64_t seed = 0;
  Provenance provenance;
};

ModelInstance make_instance(SymmetricMatrix m, SymmetricMatrix e, Provenance provenance);

/// A_ij ~ Bernoulli(P_ij) independently for i <= j, E = A - P.
ModelInstance sbm_sample(const SymmetricMatrix& p, std::uint64_t seed, bool hollow_diagonal = false);

enum class NoiseKind { gaussian, laplace, uniform, centered_bernoulli };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

/// Symmetric noise ensemble. `scale` is the variance (gaussian), the
/// Laplace scale b, the uniform half-width a, or the Bernoulli p.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::gaussian;
  double scale = 1.0;
  // Optional per-entry variances for the gaussian kind.
  std::optional<SymmetricMatrix> variance_profile;
};

/// Per-entry variance of a homogeneous ensemble: sigma^2, 2 b^2, a^2/3 or p(1-p).
double noise_variance(const NoiseSpec& noise);

/// Variance of entry (i, j), honouring a gaussian variance profile.
double noise_variance(const NoiseSpec& noise, Eigen::Index i, Eigen::Index j);

/// Independent entries for i <= j mirrored to j < i.
SymmetricMatrix noise_sample(const NoiseSpec& noise, Eigen::Index n, std::uint64_t seed);

/// Low-rank signal plus noise. Exactly one of `signal` and `latent` is set.
struct SpikeSpec {
  Eigen::Index n = 0;
  std::optional<SpectralPair> signal;  // M = U Lambda U^T
  std::optional<Matrix> latent;        // M = rho X X^T
  NoiseSpec noise;
  double rho = 1.0;
};

void validate(const SpikeSpec& spec);

/// Signal eigenpairs: the explicit pair, or top_r of rho X X^T.
SpectralPair spike_signal(const SpikeSpec& spec);

/// Latent positions: the explicit X, or rho^{-1/2} U Lambda^{1/2} (needs Lambda > 0).
Matrix spike_latent(const SpikeSpec& spec);

/// Condition number of n^{-1} X^T X.
double latent_condition(const MatrixRef& x);

ModelInstance spike_model(const SpikeSpec& spec, std::uint64_t seed);

/// lambda u u^T with u = n^{-1/2} (1, ..., 1).
SpikeSpec constant_spike(Eigen::Index n, double lambda, NoiseSpec noise);

/// Rank two, Lambda = (lambda, lambda); column 1 constant n^{-1/2}, column 2
/// +n^{-1/2} on the first n/2 coordinates and -n^{-1/2} on the rest. n even.
SpikeSpec sign_split_spike(Eigen::Index n, double lambda, NoiseSpec noise);

/// K = 3 equal blocks, B_ii = 0.5, B_ij = 0.3.
SbmSpec three_block_spec(Eigen::Index n, double rho = 1.0);

/// K = 2, B = [[0.5, 0.3], [0.3, 0.3]], pi = (0.4, 0.6).
SbmSpec two_block_spec(Eigen::Index n, double rho = 1.0);

}  // namespace specnoise
