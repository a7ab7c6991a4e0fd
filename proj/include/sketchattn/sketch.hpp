#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sketchattn/kernels.hpp"
#include "sketchattn/matrix.hpp"
#include "sketchattn/rng.hpp"

namespace sketchattn {

/// Largest n for which routines are allowed to materialize an n x n target
/// (or its 2n x 2n lifted companion). The production path works on factors
/// only; everything quadratic is an oracle for tests and audits.
inline constexpr std::size_t kOracleMaxN = 1024;

/// A uniform landmark draw: d indices into a population, i.i.d. with
/// replacement by default (that is the sampling scheme the error guarantees
/// are stated for; plain d-subsets are available for comparison).
struct SubSample {
  std::size_t population = 0;
  std::vector<std::size_t> indices;
  double scale = 0.0;  // sqrt(1/d); cancels through the factored pseudoinverse
  bool with_replacement = true;
};

SubSample uniform_subsample(std::size_t population, std::size_t d, bool with_replacement,
                            Rng& rng);

/// Rank-d factorization target ~= left * core_pinv * right. For the lifted
/// construction the three blocks are kernel evaluations against the shared
/// landmark rows, so the n x n (or 2n x 2n) matrix never exists.
struct NystromFactors {
  DenseMatrix left;       // n x d
  DenseMatrix core_pinv;  // d x d
  DenseMatrix right;      // d x n
  DenseMatrix landmarks;  // d x p, the sampled rows
};

/// The same blocks before the core is inverted; the iterative inverse and
/// the audits want the raw core.
struct LiftedBlocks {
  DenseMatrix left;       // n x d   kernel(Q, L)
  DenseMatrix core;       // d x d   kernel(L, L), exactly symmetric
  DenseMatrix right;      // d x n   kernel(L, K)
  DenseMatrix landmarks;  // d x p
};

/// Landmarks are rows of the stacked [Q; K] (indices < n hit Q, the rest K).
/// Sampling the lifted positive semidefinite extension is what buys the
/// one-sided error ordering that loewner_audit checks.
LiftedBlocks lifted_blocks(const KernelSpec& spec, const DenseMatrix& q, const DenseMatrix& k,
                           const SubSample& sample);

NystromFactors lifted_nystrom(const KernelSpec& spec, const DenseMatrix& q, const DenseMatrix& k,
                              const SubSample& sample, double rcond = 1e-10);

/// Classical column Nystrom on the n x n target itself (landmarks indexed
/// into [0, n), core taken from the target, not the lifted extension).
/// Baseline only; it has no one-sided guarantee.
NystromFactors naive_nystrom(const KernelSpec& spec, const DenseMatrix& q, const DenseMatrix& k,
                             const SubSample& sample, double rcond = 1e-10);

/// left * (core_pinv * (right * v)); the production evaluation order.
DenseMatrix nystrom_apply(const NystromFactors& f, const DenseMatrix& v);

/// left * core_pinv * right as a dense matrix. Oracle only (n <= kOracleMaxN).
DenseMatrix nystrom_materialize(const NystromFactors& f);

/// Relative spectral error ||target - approx|| / ||target||, materializing
/// the target. Oracle only.
double nystrom_error(const KernelSpec& spec, const DenseMatrix& q, const DenseMatrix& k,
                     const NystromFactors& f);

struct IterInverseConfig {
  double gamma = 1e-3;
  std::size_t max_iters = 20;
  double residual_tol = 1e-7;
};

struct IterInverseResult {
  DenseMatrix inverse;                   // approximates (m + gamma I)^-1
  std::vector<double> residual_history;  // ||I - M' Z_k||_F / sqrt(d), k = 0, 1, ...
  bool converged = false;
};

/// Newton-Schulz iteration Z <- Z (2I - M'Z), Z_0 = I, on the preconditioned
/// matrix M' = D^-1/2 (m + gamma I) D^-1/2 with D = diag((m + gamma I) 1).
/// The row-sum preconditioner puts every singular value of M' inside (0, 1]
/// for symmetric PSD m, which is exactly the regime where the iteration
/// contracts. Raises DivergenceError after three consecutive non-decreasing
/// residuals, and std::invalid_argument if a preconditioner row sum is not
/// positive.
IterInverseResult iterative_inverse(const DenseMatrix& m, const IterInverseConfig& cfg);

/// (smallest, largest) singular value of M' as above, via the Jacobi oracle.
std::pair<double, double> precondition_spectrum_check(const DenseMatrix& m, double gamma);

/// Sum of sigma_i / (sigma_i + lambda) over a PSD spectrum; eigenvalues in
/// [-1e-8 * max, 0) are treated as rounding noise and clamped to zero.
double statistical_dimension(std::span<const double> spectrum, double lambda);

/// Diagonal of cbar (cbar + lambda I)^-1 by Cholesky solve; the per-row
/// sampling weights whose sum is the statistical dimension.
std::vector<double> leverage_scores(const DenseMatrix& cbar, double lambda);

}  // namespace sketchattn
