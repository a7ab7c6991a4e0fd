#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sketchattn/attention.hpp"
#include "sketchattn/kernels.hpp"
#include "sketchattn/matrix.hpp"

namespace sketchattn {

enum class Distribution { IsotropicGaussian, AnisotropicGaussian };

/// Synthetic head generator. Isotropic draws are i.i.d. N(0, sigma^2);
/// anisotropic draws rescale column j so its variance is decay^j, mimicking
/// the decaying feature spectra of trained heads.
struct SyntheticSpec {
  std::size_t n = 256;
  std::size_t p = 8;
  Distribution distribution = Distribution::IsotropicGaussian;
  double sigma = 1.0;   // isotropic standard deviation
  double decay = 0.5;   // anisotropic geometric variance ratio, > 0
  std::uint64_t seed = 0;
};

/// Draw Q, K, V for the spec; p_v = 0 means V gets p columns too. Q, K and V
/// come from disjoint child streams of the seed.
AttentionInput generate_qkv(const SyntheticSpec& spec, std::size_t p_v = 0);

/// Approximation methods the error sweep compares.
enum class Method { Exact, SkyformerLifted, NaiveNystrom, TruncatedSVD };
const char* method_name(Method m);

enum class AttentionKindId { SoftmaxExact, KernelizedExact, Skyformer };
const char* attention_kind_name(AttentionKindId k);

/// One measured cell of any experiment; serialized as a CSV row.
struct ApproxReport {
  std::string experiment;
  std::size_t n = 0, p = 0, d = 0;
  std::uint64_t seed = 0;
  std::string method;
  std::string kernel;
  std::string metric;
  double value = 0.0;
};

/// Relative spectral error of each method on the kernel target, over a
/// d-grid and a seed list (one synthetic instance per seed). Landmark draws
/// for cell (seed, d, method) come from a stream derived from all three
/// coordinates, so any cell can be reproduced in isolation. Oracle-scale
/// only; cells run in parallel under the thread budget.
std::vector<ApproxReport> spectral_sweep(const SyntheticSpec& spec, const KernelSpec& kernel,
                                         std::span<const std::size_t> ds,
                                         std::span<const std::uint64_t> seeds,
                                         std::span<const Method> methods,
                                         bool with_replacement = true);

/// Ordering audit of the lifted approximation: for each seed, materialize
/// the 2n x 2n PSD extension and its landmark approximation, and
/// eigendecompose the gap with the Jacobi oracle. min_eig stays above
/// -tol * ||cbar|| when the approximation never overshoots; lambda_emp (the
/// gap's largest eigenvalue) is the empirical one-sided error, and block_err
/// is the spectral error of the embedded n x n target block, which the gap
/// norm bounds from above.
struct LoewnerRecord {
  std::uint64_t seed = 0;
  double min_eig = 0.0;
  double lambda_emp = 0.0;
  double cbar_norm = 0.0;
  double block_err = 0.0;
};

std::vector<LoewnerRecord> loewner_audit(const SyntheticSpec& spec, const KernelSpec& kernel,
                                         std::size_t d,
                                         std::span<const std::uint64_t> seeds,
                                         bool with_replacement = true);

/// Top-k singular values of a matrix, normalized by the largest.
std::vector<double> decay_spectrum(const DenseMatrix& m, std::size_t top_k);

enum class PerturbTarget { QueryKey, ValueOnly };

struct SensitivityResult {
  std::string attention_kind;
  double tau = 0.0;               // mean of ||f(in + delta) - f(in)||_F^2 / ||delta||_F^2
  double ratio_vs_softmax = 1.0;  // output-scale-normalized tau over the softmax reference's
};

/// Instability score: perturb (Q, K) (or V) by fixed random directions of
/// Frobenius size perturb_scale * ||(Q, K)||_F and average the squared output
/// change over trials. The softmax reference sees the same perturbations.
/// tau is the raw score. ratio_vs_softmax divides each side's tau by its
/// unperturbed squared output norm before comparing, because the unnormalized
/// kernel paths produce outputs an order of magnitude larger than softmax's
/// convex combinations and a raw ratio would only measure that scale gap.
SensitivityResult perturbation_sensitivity(const AttentionInput& in, AttentionKindId kind,
                                           double perturb_scale, std::size_t trials,
                                           std::uint64_t seed, const SkyformerConfig& sky_cfg,
                                           PerturbTarget target = PerturbTarget::QueryKey);

/// Median wall time and analytic peak memory per (n, method). Cells run
/// strictly sequentially so timings do not contaminate each other; each cell
/// gets one warmup run plus `repeats` measured runs. `kernel` picks the
/// skyformer kernel; the exact paths keep their defining kernels.
std::vector<ApproxReport> runtime_sweep(std::span<const std::size_t> ns, std::size_t d,
                                        std::size_t p, std::size_t p_v, KernelKind kernel,
                                        std::span<const AttentionKindId> methods,
                                        std::size_t repeats);

/// Peak bytes of matrices a pipeline allocates, counted from shapes.
/// Documents the n^2 vs n * d memory split the runtime sweep reports.
std::size_t analytic_peak_bytes(AttentionKindId kind, std::size_t n, std::size_t p,
                                std::size_t p_v, std::size_t d);

/// Largest n the exact O(n^2) attention paths accept in the runtime sweep.
inline constexpr std::size_t kExactRuntimeMaxN = 8192;

}  // namespace sketchattn
