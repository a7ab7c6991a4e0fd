#include "sketchattn/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "sketchattn/decomp.hpp"
#include "sketchattn/errors.hpp"

namespace sketchattn {

namespace {

void require_oracle_scale(std::size_t n, const char* op) {
  if (n > kOracleMaxN) {
    throw std::invalid_argument(std::string(op) + ": n = " + std::to_string(n) +
                                " exceeds the oracle guard of " + std::to_string(kOracleMaxN) +
                                "; this routine materializes the full target");
  }
}

void check_qk(const DenseMatrix& q, const DenseMatrix& k, const char* op) {
  if (q.empty() || k.empty()) throw ShapeError(std::string(op) + ": empty input");
  if (q.cols() != k.cols()) {
    throw ShapeError(std::string(op) + ": q has " + std::to_string(q.cols()) +
                     " columns, k has " + std::to_string(k.cols()));
  }
}

}  // namespace

SubSample uniform_subsample(std::size_t population, std::size_t d, bool with_replacement,
                            Rng& rng) {
  if (population == 0) throw std::invalid_argument("uniform_subsample: empty population");
  if (d == 0) throw std::invalid_argument("uniform_subsample: d must be at least 1");
  if (!with_replacement && d > population) {
    throw std::invalid_argument("uniform_subsample: d = " + std::to_string(d) +
                                " exceeds population " + std::to_string(population) +
                                " for a draw without replacement");
  }
  SubSample s;
  s.population = population;
  s.scale = std::sqrt(1.0 / static_cast<double>(d));
  s.with_replacement = with_replacement;
  s.indices.resize(d);
  if (with_replacement) {
    for (std::size_t i = 0; i < d; ++i) {
      s.indices[i] = static_cast<std::size_t>(rng.next_below(population));
    }
  } else {
    // partial Fisher-Yates; the first d slots are a uniform d-subset
    std::vector<std::size_t> pool(population);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.next_below(population - i));
      std::swap(pool[i], pool[j]);
      s.indices[i] = pool[i];
    }
  }
  return s;
}

LiftedBlocks lifted_blocks(const KernelSpec& spec, const DenseMatrix& q, const DenseMatrix& k,
                           const SubSample& sample) {
  check_qk(q, k, "lifted_blocks");
  if (q.rows() != k.rows()) {
    throw ShapeError("lifted_blocks: q and k row counts disagree");
  }
  if (sample.population != q.rows() + k.rows()) {
    throw std::invalid_argument("lifted_blocks: sample population " +
                                std::to_string(sample.population) + " is not 2n = " +
                                std::to_string(q.rows() + k.rows()));
  }
  const std::size_t n = q.rows();
  LiftedBlocks b;
  b.landmarks = DenseMatrix(sample.indices.size(), q.cols());
  for (std::size_t i = 0; i < sample.indices.size(); ++i) {
    const std::size_t idx = sample.indices[i];
    const double* src = idx < n ? q.row_ptr(idx) : k.row_ptr(idx - n);
    double* dst = b.landmarks.row_ptr(i);
    for (std::size_t j = 0; j < q.cols(); ++j) dst[j] = src[j];
  }
  b.left = kernel_matrix(spec, q, b.landmarks);
  b.core = kernel_gram(spec, b.landmarks);
  b.right = kernel_matrix(spec, b.landmarks, k);
  return b;
}

NystromFactors lifted_nystrom(const KernelSpec& spec, const DenseMatrix& q, const DenseMatrix& k,
                              const SubSample& sample, double rcond) {
  LiftedBlocks b = lifted_blocks(spec, q, k, sample);
  NystromFactors f;
  f.core_pinv = pinv(b.core, rcond);
  f.left = std::move(b.left);
  f.right = std::move(b.right);
  f.landmarks = std::move(b.landmarks);
  return f;
}

NystromFactors naive_nystrom(const KernelSpec& spec, const DenseMatrix& q, const DenseMatrix& k,
                             const SubSample& sample, double rcond) {
  check_qk(q, k, "naive_nystrom");
  if (sample.population != q.rows()) {
    throw std::invalid_argument("naive_nystrom: sample population " +
                                std::to_string(sample.population) + " is not n = " +
                                std::to_string(q.rows()));
  }
  const DenseMatrix q_rows = select_rows(q, sample.indices);
  const DenseMatrix k_rows = select_rows(k, sample.indices);
  NystromFactors f;
  f.left = kernel_matrix(spec, q, k_rows);
  // core = target[J, J]; generally asymmetric when q != k
  f.core_pinv = pinv(kernel_matrix(spec, q_rows, k_rows), rcond);
  f.right = kernel_matrix(spec, q_rows, k);
  f.landmarks = k_rows;
  return f;
}

DenseMatrix nystrom_apply(const NystromFactors& f, const DenseMatrix& v) {
  return matmul(f.left, matmul(f.core_pinv, matmul(f.right, v)));
}

DenseMatrix nystrom_materialize(const NystromFactors& f) {
  // lifted audits materialize the 2n x 2n extension, hence the factor 2
  if (std::max(f.left.rows(), f.right.cols()) > 2 * kOracleMaxN) {
    throw std::invalid_argument("nystrom_materialize: output exceeds the oracle guard");
  }
  return matmul(f.left, matmul(f.core_pinv, f.right));
}

double nystrom_error(const KernelSpec& spec, const DenseMatrix& q, const DenseMatrix& k,
                     const NystromFactors& f) {
  check_qk(q, k, "nystrom_error");
  require_oracle_scale(std::max(q.rows(), k.rows()), "nystrom_error");
  const DenseMatrix target = kernel_matrix(spec, q, k);
  const DenseMatrix approx = matmul(f.left, matmul(f.core_pinv, f.right));
  const double tnorm = spectral_norm(target);
  const double err = spectral_norm(subtract(target, approx));
  return tnorm > 0.0 ? err / tnorm : err;
}

IterInverseResult iterative_inverse(const DenseMatrix& m, const IterInverseConfig& cfg) {
  if (m.empty() || m.rows() != m.cols()) {
    throw ShapeError("iterative_inverse: input must be square and nonempty");
  }
  if (cfg.gamma < 0.0) throw std::invalid_argument("iterative_inverse: gamma must be >= 0");
  if (cfg.residual_tol <= 0.0) {
    throw std::invalid_argument("iterative_inverse: residual_tol must be positive");
  }
  const std::size_t d = m.rows();
  DenseMatrix shifted = m;
  add_scaled_identity(shifted, cfg.gamma);
  const std::vector<double> sums = row_sums(shifted);
  std::vector<double> dinv_sqrt(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (!(sums[i] > 0.0)) {
      throw std::invalid_argument("iterative_inverse: row sum " + std::to_string(i) +
                                  " of m + gamma I is not positive; the row-sum preconditioner "
                                  "needs positive entries");
    }
    dinv_sqrt[i] = 1.0 / std::sqrt(sums[i]);
  }
  DenseMatrix mp(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) mp(i, j) = shifted(i, j) * dinv_sqrt[i] * dinv_sqrt[j];

  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  IterInverseResult result;
  DenseMatrix z = DenseMatrix::identity(d);
  std::size_t non_decreasing = 0;
  for (std::size_t iter = 0;; ++iter) {
    const DenseMatrix product = matmul(mp, z);
    DenseMatrix residual_matrix = product;
    for (auto& v : residual_matrix.data()) v = -v;
    add_scaled_identity(residual_matrix, 1.0);
    const double residual = frobenius_norm(residual_matrix) * inv_sqrt_d;
    result.residual_history.push_back(residual);
    if (residual <= cfg.residual_tol) {
      result.converged = true;
      break;
    }
    if (result.residual_history.size() >= 2 &&
        residual >= result.residual_history[result.residual_history.size() - 2]) {
      if (++non_decreasing >= 3) {
        throw DivergenceError("iterative_inverse: residual non-decreasing for 3 iterations (" +
                              std::to_string(residual) + " at iteration " + std::to_string(iter) +
                              "); input is likely not PSD");
      }
    } else {
      non_decreasing = 0;
    }
    if (iter == cfg.max_iters) break;
    // Z <- Z (2I - M'Z) = Z + Z (I - M'Z)
    const DenseMatrix update = matmul(z, residual_matrix);
    auto zs = z.data();
    auto us = update.data();
    for (std::size_t idx = 0; idx < zs.size(); ++idx) zs[idx] += us[idx];
  }
  // undo the preconditioning: (m + gamma I)^-1 = D^-1/2 Z D^-1/2
  result.inverse = std::move(z);
  for (std::size_t i = 0; i < d; ++i) {
    double* row = result.inverse.row_ptr(i);
    for (std::size_t j = 0; j < d; ++j) row[j] *= dinv_sqrt[i] * dinv_sqrt[j];
  }
  return result;
}

std::pair<double, double> precondition_spectrum_check(const DenseMatrix& m, double gamma) {
  if (m.empty() || m.rows() != m.cols()) {
    throw ShapeError("precondition_spectrum_check: input must be square and nonempty");
  }
  if (gamma < 0.0) throw std::invalid_argument("precondition_spectrum_check: gamma must be >= 0");
  const std::size_t d = m.rows();
  DenseMatrix shifted = m;
  add_scaled_identity(shifted, gamma);
  const std::vector<double> sums = row_sums(shifted);
  std::vector<double> dinv_sqrt(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (!(sums[i] > 0.0)) {
      throw std::invalid_argument("precondition_spectrum_check: row sum " + std::to_string(i) +
                                  " is not positive");
    }
    dinv_sqrt[i] = 1.0 / std::sqrt(sums[i]);
  }
  DenseMatrix mp(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) mp(i, j) = shifted(i, j) * dinv_sqrt[i] * dinv_sqrt[j];
  const SymmetricEigen eig = sym_eigen(mp);
  double min_sv = std::abs(eig.eigenvalues.front());
  double max_sv = min_sv;
  for (double v : eig.eigenvalues) {
    min_sv = std::min(min_sv, std::abs(v));
    max_sv = std::max(max_sv, std::abs(v));
  }
  return {min_sv, max_sv};
}

double statistical_dimension(std::span<const double> spectrum, double lambda) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("statistical_dimension: lambda must be positive");
  }
  double max_value = 0.0;
  for (double v : spectrum) max_value = std::max(max_value, v);
  double acc = 0.0;
  for (double v : spectrum) {
    if (v < -1e-8 * max_value) {
      throw std::invalid_argument("statistical_dimension: eigenvalue " + std::to_string(v) +
                                  " is too negative for a PSD spectrum");
    }
    const double clamped = std::max(v, 0.0);
    acc += clamped / (clamped + lambda);
  }
  return acc;
}

std::vector<double> leverage_scores(const DenseMatrix& cbar, double lambda) {
  if (cbar.empty() || cbar.rows() != cbar.cols()) {
    throw ShapeError("leverage_scores: input must be square and nonempty");
  }
  if (!(lambda > 0.0)) throw std::invalid_argument("leverage_scores: lambda must be positive");
  DenseMatrix shifted = cbar;
  add_scaled_identity(shifted, lambda);
  const DenseMatrix lower = cholesky_factor(shifted);
  const DenseMatrix solved = cholesky_solve(lower, cbar);
  std::vector<double> scores(cbar.rows());
  for (std::size_t i = 0; i < cbar.rows(); ++i) scores[i] = solved(i, i);
  return scores;
}

}  // namespace sketchattn
