#pragma once

#include <cstddef>
#include <cstdint>

#include "sketchattn/kernels.hpp"
#include "sketchattn/matrix.hpp"
#include "sketchattn/sketch.hpp"

namespace sketchattn {

/// One attention head: q, k are n x p, v is n x p_v.
struct AttentionInput {
  DenseMatrix q, k, v;
};

void validate(const AttentionInput& in);

enum class InverseMode { ExactPinv, Iterative };

struct SkyformerConfig {
  std::size_t d = 64;                          // landmark count
  KernelSpec kernel{KernelKind::Gaussian, 0};  // head_dim_p must match the input
  InverseMode inverse_mode = InverseMode::ExactPinv;
  IterInverseConfig iter{};                    // used by Iterative mode
  double rcond = 1e-10;                        // used by ExactPinv mode
  std::uint64_t seed = 0;
  bool with_replacement = true;
};

/// softmax(Q K^T / sqrt(p)) V, rows normalized to sum to one. O(n^2) memory;
/// reference implementation and runtime baseline.
DenseMatrix softmax_attention_exact(const AttentionInput& in);

/// Gaussian-kernel attention C V without the softmax normalizer. Related to
/// the softmax matrix by the diagonal exp-norm factors on both sides, which
/// is what makes the PSD lifting applicable.
DenseMatrix kernelized_attention_exact(const AttentionInput& in);

/// Kernel attention through the lifted landmark factorization:
/// left (core^+ (right V)), evaluated right to left so the cost stays
/// O(n d (p + p_v) + d^3) and nothing n x n is ever allocated.
DenseMatrix skyformer_attention(const AttentionInput& in, const SkyformerConfig& cfg);

struct ApproxSoftmaxResult {
  DenseMatrix output;
  std::size_t clamped = 0;       // rows whose normalizer hit the floor
  bool heavy_clamping = false;   // more than 1% of rows clamped
};

/// Softmax attention with both the weight matrix and its row normalizer
/// approximated through the same landmark factorization of the softmax
/// kernel. Normalizer entries below 1e-6 * max are clamped to that floor.
ApproxSoftmaxResult approx_softmax_attention(const AttentionInput& in,
                                             const SkyformerConfig& cfg);

/// Best rank-`rank` approximation of c (projection onto the top right
/// singular subspace). Oracle lower bound for the error sweeps: no rank-d
/// method can beat it in spectral norm.
DenseMatrix truncated_svd_baseline(const DenseMatrix& c, std::size_t rank);

}  // namespace sketchattn
