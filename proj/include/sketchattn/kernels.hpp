#pragma once

#include <cstddef>
#include <vector>

#include "sketchattn/matrix.hpp"

namespace sketchattn {

/// The two kernels the attention pipelines are built from.
///
/// SoftmaxSM:  k(x, y) = exp(<x, y> / sqrt(p))      (unnormalized softmax)
/// Gaussian:   k(x, y) = exp(-||x - y||^2 / (2 sqrt(p)))
///
/// The Gaussian bandwidth is tied to the head dimension (inputs implicitly
/// scaled by p^(1/4)); the two kernels are then related entrywise by
///   SM(q, k) = exp(||q||^2 / (2 sqrt(p))) * Gauss(q, k) * exp(||k||^2 / (2 sqrt(p)))
/// which sm_from_gaussian exploits and the test suite verifies.
enum class KernelKind { SoftmaxSM, Gaussian };

struct KernelSpec {
  KernelKind kind = KernelKind::Gaussian;
  std::size_t head_dim_p = 1;
};

/// exp() arguments past this limit raise OverflowError instead of producing
/// inf; the caller is the one who has to rescale its inputs.
inline constexpr double kExpArgLimit = 700.0;

/// Kernel matrix between the rows of `rows` and the rows of `cols`
/// (out[i][j] = k(rows_i, cols_j)). Evaluated through one row-by-row GEMM
/// plus precomputed squared norms, then a pointwise exp.
/// Passing the same object for both arguments takes the symmetric path.
DenseMatrix kernel_matrix(const KernelSpec& spec, const DenseMatrix& rows,
                          const DenseMatrix& cols);

/// kernel_matrix(spec, x, x) with the upper triangle mirrored so the result
/// is exactly symmetric, and the Gaussian diagonal pinned to 1.
DenseMatrix kernel_gram(const KernelSpec& spec, const DenseMatrix& x);

/// Row weights exp(||m_i||^2 / sqrt(p)) of the softmax factorization; raises
/// OverflowError naming the first row whose norm would overflow exp().
std::vector<double> diag_exp_norms(const KernelSpec& spec, const DenseMatrix& m);

/// Rebuild the softmax kernel from the Gaussian one via the entrywise
/// identity above. Reference path used by the factorization checks.
DenseMatrix sm_from_gaussian(const DenseMatrix& q, const DenseMatrix& k, std::size_t head_dim_p);

const char* kernel_name(KernelKind kind);

}  // namespace sketchattn
