#include "sketchattn/attention.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sketchattn/decomp.hpp"
#include "sketchattn/errors.hpp"

namespace sketchattn {

namespace {

// tag for deriving the landmark sampling stream from a config seed
constexpr std::uint64_t kSampleStreamTag = 0x6c616e646d61726bull;  // "landmark"

void check_kernel_dim(const SkyformerConfig& cfg, const AttentionInput& in, const char* op) {
  if (cfg.kernel.head_dim_p != in.q.cols()) {
    throw ShapeError(std::string(op) + ": config kernel has p = " +
                     std::to_string(cfg.kernel.head_dim_p) + ", input has p = " +
                     std::to_string(in.q.cols()));
  }
  if (cfg.d == 0) throw std::invalid_argument(std::string(op) + ": d must be at least 1");
}

DenseMatrix core_inverse(const LiftedBlocks& blocks, const SkyformerConfig& cfg) {
  if (cfg.inverse_mode == InverseMode::ExactPinv) return pinv(blocks.core, cfg.rcond);
  return iterative_inverse(blocks.core, cfg.iter).inverse;
}

}  // namespace

void validate(const AttentionInput& in) {
  if (in.q.empty() || in.k.empty() || in.v.empty()) {
    throw ShapeError("attention input: q, k, v must be nonempty");
  }
  if (in.q.cols() != in.k.cols()) {
    throw ShapeError("attention input: q has " + std::to_string(in.q.cols()) +
                     " columns, k has " + std::to_string(in.k.cols()));
  }
  if (in.q.rows() != in.k.rows() || in.q.rows() != in.v.rows()) {
    throw ShapeError("attention input: q, k, v row counts disagree (" +
                     std::to_string(in.q.rows()) + ", " + std::to_string(in.k.rows()) + ", " +
                     std::to_string(in.v.rows()) + ")");
  }
}

DenseMatrix softmax_attention_exact(const AttentionInput& in) {
  validate(in);
  const KernelSpec spec{KernelKind::SoftmaxSM, in.q.cols()};
  DenseMatrix weights = kernel_matrix(spec, in.q, in.k);
  const std::vector<double> sums = row_sums(weights);
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    const double inv = 1.0 / sums[i];
    double* row = weights.row_ptr(i);
    for (std::size_t j = 0; j < weights.cols(); ++j) row[j] *= inv;
  }
  return matmul(weights, in.v);
}

DenseMatrix kernelized_attention_exact(const AttentionInput& in) {
  validate(in);
  const KernelSpec spec{KernelKind::Gaussian, in.q.cols()};
  const DenseMatrix c = kernel_matrix(spec, in.q, in.k);
  return matmul(c, in.v);
}

DenseMatrix skyformer_attention(const AttentionInput& in, const SkyformerConfig& cfg) {
  validate(in);
  check_kernel_dim(cfg, in, "skyformer_attention");
  Rng rng = Rng::derive(cfg.seed, {kSampleStreamTag});
  const SubSample sample =
      uniform_subsample(2 * in.q.rows(), cfg.d, cfg.with_replacement, rng);
  const LiftedBlocks blocks = lifted_blocks(cfg.kernel, in.q, in.k, sample);
  const DenseMatrix inverse = core_inverse(blocks, cfg);
  return matmul(blocks.left, matmul(inverse, matmul(blocks.right, in.v)));
}

ApproxSoftmaxResult approx_softmax_attention(const AttentionInput& in,
                                             const SkyformerConfig& cfg) {
  validate(in);
  check_kernel_dim(cfg, in, "approx_softmax_attention");
  if (cfg.kernel.kind != KernelKind::SoftmaxSM) {
    throw std::invalid_argument(
        "approx_softmax_attention: config kernel must be the softmax kernel");
  }
  Rng rng = Rng::derive(cfg.seed, {kSampleStreamTag});
  const SubSample sample =
      uniform_subsample(2 * in.q.rows(), cfg.d, cfg.with_replacement, rng);
  const LiftedBlocks blocks = lifted_blocks(cfg.kernel, in.q, in.k, sample);
  const DenseMatrix inverse = core_inverse(blocks, cfg);

  // both the weight application and its row normalizer go through the same
  // factors: weights ~= left inverse right, normalizer = weights * ones
  const std::size_t n = in.q.rows();
  const std::vector<double> right_ones = row_sums(blocks.right);  // = right * 1, length d
  std::vector<double> normalizer = matvec(blocks.left, matvec(inverse, right_ones));

  double max_entry = *std::max_element(normalizer.begin(), normalizer.end());
  if (!(max_entry > 0.0)) max_entry = 1.0;  // fully degenerate approximation
  const double floor = 1e-6 * max_entry;
  ApproxSoftmaxResult result;
  for (double& value : normalizer) {
    if (value < floor) {
      value = floor;
      ++result.clamped;
    }
  }
  result.heavy_clamping = 100 * result.clamped > n;

  DenseMatrix out = matmul(blocks.left, matmul(inverse, matmul(blocks.right, in.v)));
  for (std::size_t i = 0; i < n; ++i) {
    const double inv = 1.0 / normalizer[i];
    double* row = out.row_ptr(i);
    for (std::size_t j = 0; j < out.cols(); ++j) row[j] *= inv;
  }
  result.output = std::move(out);
  return result;
}

DenseMatrix truncated_svd_baseline(const DenseMatrix& c, std::size_t rank) {
  if (c.empty()) throw ShapeError("truncated_svd_baseline: empty matrix");
  if (rank == 0) return DenseMatrix(c.rows(), c.cols(), 0.0);
  if (c.rows() < c.cols()) return transpose(truncated_svd_baseline(transpose(c), rank));
  const DenseMatrix ct = transpose(c);
  const DenseMatrix gram = matmul_nt(ct, ct);
  const SymmetricEigen eig = sym_eigen_tridiag(gram);
  const std::size_t keep = std::min(rank, c.cols());
  // A_r = A V_r V_r^T: project onto the top right singular directions
  DenseMatrix vr(c.cols(), keep);
  for (std::size_t i = 0; i < c.cols(); ++i)
    for (std::size_t k = 0; k < keep; ++k) vr(i, k) = eig.eigenvectors(i, k);
  return matmul(matmul(c, vr), transpose(vr));
}

}  // namespace sketchattn
