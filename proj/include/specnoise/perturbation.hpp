#pragma once

// First-order eigenvector expansion U_hat - U W = E U Lambda^{-1} W + R,
// with R split into closed-form pieces whose sums reconstruct exactly,
// the resolvent (Neumann) series for U_hat, and the higher-order entrywise
// concentration diagnostic for powers of E.

#include <optional>
#include <vector>

#include "specnoise/linalg.hpp"
#include "specnoise/models.hpp"

namespace specnoise {

/// ceil(log n / log(n rho)); requires n rho > 1.
int k_of_n(Eigen::Index n, double rho);

/// Two-to-infinity norms of every piece of a DecompositionReport.
struct PieceNorms {
  double deviation = 0.0;
  double leading = 0.0;
  double residual = 0.0;
  double noise_projection = 0.0;
  double eigenvalue_mismatch = 0.0;
  double alignment_gap = 0.0;
  double second_eigenvalue_mismatch = 0.0;
  double second_alignment_gap = 0.0;
  double series_tail = 0.0;
};

/// All matrices are n x r unless noted.
///
///   U_hat - U W = E U_hat Lambda_hat^{-1}          (noise_projection)
///               + U Lambda (-H1 o U^T E U_hat)     (eigenvalue_mismatch)
///               + U (U^T U_hat - W)                (alignment_gap)
///
///   E U_hat Lambda_hat^{-1} = E U Lambda^{-1} W    (leading)
///               + E U Lambda (-H2 o U^T (M_hat E + E M_hat - E^2) U_hat)
///               + E U Lambda^{-1} (U^T U_hat - W)
///               + E U_hat Lambda_hat^{-1} - E U Lambda U^T U_hat Lambda_hat^{-2}
///
/// with (H1)_ij = 1 / (Lambda_ii Lambda_hat_jj), (H2)_ij = (H1)_ij^2.
struct DecompositionReport {
  Matrix deviation;  // U_hat - U W
  Matrix leading;
  Matrix residual;  // sum of the five remainder pieces
  Matrix noise_projection;
  Matrix eigenvalue_mismatch;
  Matrix alignment_gap;
  Matrix second_eigenvalue_mismatch;
  Matrix second_alignment_gap;
  Matrix series_tail;
  Matrix h1;  // r x r
  Matrix h2;  // r x r
  PieceNorms two_to_inf;
  double first_identity_defect = 0.0;   // max-entry
  double second_identity_defect = 0.0;  // max-entry
};

/// Requires Lambda_hat invertible (|Lambda_hat_rr| > 1e-12 |Lambda_hat_11|)
/// and M = U Lambda U^T to 1e-8 relative in Frobenius norm.
DecompositionReport decompose(const ModelInstance& instance, const SpectralPair& pair,
                              const SpectralPair& pair_hat, const MatrixRef& w);

struct NeumannReport {
  Matrix approximation;             // S_K
  std::vector<Matrix> terms;        // E^k U Lambda U^T U_hat Lambda_hat^{-(k+1)}, k = 0..K
  std::vector<double> term_norms;   // spectral
  std::vector<double> error_norms;  // ||S_k - U_hat||, k = 0..K
  std::vector<double> tail_bounds;  // q^{k+1} ||Lambda|| ||Lambda_hat^{-1}|| / (1 - q)
  double noise_norm = 0.0;          // ||E||
  double contraction = 0.0;         // q = ||E|| ||Lambda_hat^{-1}||
};

/// Partial sums of U_hat = sum_k E^k M U_hat Lambda_hat^{-(k+1)} up to `order`.
/// Throws InvalidInput when q >= 1.
NeumannReport neumann_partial(const ModelInstance& instance, const SpectralPair& pair,
                              const SpectralPair& pair_hat, int order);

struct ConcentrationReport {
  Eigen::Index n = 0;
  double rho = 1.0;
  double xi = 1.1;
  int k_n = 1;    // k(n)
  int k_max = 2;  // powers checked: 1..k_max
  Matrix max_abs;  // k_max x r, max_i |<E^k u_j, e_i>|
  Matrix ratios;   // max_abs / ((n rho)^{k/2} (log n)^{k xi} ||u_j||_inf)
  // Smallest C_E with |<E^k u, e_i>| <= (C_E n rho)^{k/2} (log n)^{k xi} ||u||_inf
  // for every k, i and column checked.
  double certified_c_e = 0.0;
};

inline constexpr double kDefaultXi = 1.1;

/// E^k u by repeated block products; k_max defaults to k(n) + 1.
ConcentrationReport check_assumption4(const SymmetricMatrix& e, const MatrixRef& u, double rho,
                                      double xi = kDefaultXi, std::optional<int> k_max = std::nullopt,
                                      int threads = 1);

struct LeadingTerm {
  Matrix leading;     // E U Lambda^{-1} W
  Matrix linearized;  // M_hat U Lambda^{-1} W = U W + leading
  double leading_two_to_inf = 0.0;
  double linearized_gap_two_to_inf = 0.0;  // ||U_hat - M_hat U Lambda^{-1} W||_{2->inf}
};

LeadingTerm first_order_leading(const ModelInstance& instance, const SpectralPair& pair,
                                const MatrixRef& u_hat, const MatrixRef& w);

/// lambda_r^{-1/2} (log n) n^{-1/2}.
double phi_benchmark(Eigen::Index n, double lambda_r);

/// sqrt(2) ||E|| / min(|Lambda_hat_rr|, |Lambda_rr|).
double davis_kahan_bound(double noise_norm, const SpectralPair& pair, const SpectralPair& pair_hat);

/// min{ r^{1/2} (log n)^xi ||U||_{2->inf}, 1 } (n rho)^{-1/2}, reported for
/// comparison only.
double two_to_inf_rate(const SpectralPair& pair, double rho, double xi = kDefaultXi);

}  // namespace specnoise
