#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sketchattn/matrix.hpp"

namespace sketchattn {

inline constexpr double kDefaultPowerTol = 1e-7;
inline constexpr std::size_t kDefaultPowerMaxIters = 10000;
inline constexpr double kDefaultPinvRcond = 1e-10;

/// Inputs this far from symmetric (relative Frobenius) are rejected by the
/// symmetric decompositions instead of being silently symmetrized.
inline constexpr double kSymmetryTol = 1e-8;

struct SymmetricEigen {
  std::vector<double> eigenvalues;  // descending
  DenseMatrix eigenvectors;         // column k pairs with eigenvalues[k]
};

struct SpectralNormEstimate {
  double value = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

/// Largest singular value by power iteration on m^T m (applied as two
/// mat-vecs, m^T m is never formed). Start vector is all-ones normalized;
/// converged when successive estimates differ by < tol relatively. On
/// non-convergence the best estimate is returned with converged = false.
SpectralNormEstimate spectral_norm_estimate(const DenseMatrix& m,
                                            double tol = kDefaultPowerTol,
                                            std::size_t max_iters = kDefaultPowerMaxIters);
double spectral_norm(const DenseMatrix& m, double tol = kDefaultPowerTol,
                     std::size_t max_iters = kDefaultPowerMaxIters);

/// Symmetric eigendecomposition by cyclic Jacobi rotations. Slow but very
/// accurate; this is the oracle the audits and property tests lean on.
/// Requires relative asymmetry below kSymmetryTol, then works on (m+m^T)/2.
SymmetricEigen sym_eigen(const DenseMatrix& m);

/// Same contract as sym_eigen via Householder tridiagonalization + implicit
/// QL. Roughly an order of magnitude faster; backs pinv on the hot path so
/// the core factorization cannot dominate the linear-time attention pipeline.
/// Cross-checked against sym_eigen in the test suite.
SymmetricEigen sym_eigen_tridiag(const DenseMatrix& m);

/// Moore-Penrose pseudoinverse. Symmetric inputs go through the dedicated
/// eigendecomposition (signed eigenvalues, so indefinite matrices are fine);
/// general inputs go through the Gram matrix of the smaller side. Singular
/// values at or below rcond * sigma_max are truncated to zero.
DenseMatrix pinv(const DenseMatrix& m, double rcond = kDefaultPinvRcond);

/// All singular values, descending, via the eigenvalues of the Gram matrix
/// on the smaller side.
std::vector<double> singular_value_spectrum(const DenseMatrix& m);

/// Cholesky factor (lower triangular) of a symmetric positive definite
/// matrix. Throws std::runtime_error if a pivot is not positive.
DenseMatrix cholesky_factor(const DenseMatrix& spd);

/// Solve (L L^T) X = B column by column for the factor from cholesky_factor.
DenseMatrix cholesky_solve(const DenseMatrix& lower, const DenseMatrix& b);

}  // namespace sketchattn
