#include "sketchattn/kernels.hpp"

#include <cmath>
#include <string>

#include "sketchattn/errors.hpp"

namespace sketchattn {

namespace {

void check_inputs(const KernelSpec& spec, const DenseMatrix& a, const DenseMatrix& b,
                  const char* op) {
  if (spec.head_dim_p == 0) throw std::invalid_argument(std::string(op) + ": head_dim_p is zero");
  if (a.empty() || b.empty()) throw ShapeError(std::string(op) + ": empty input");
  if (a.cols() != spec.head_dim_p || b.cols() != spec.head_dim_p) {
    throw ShapeError(std::string(op) + ": inputs have " + std::to_string(a.cols()) + " and " +
                     std::to_string(b.cols()) + " columns, spec says p = " +
                     std::to_string(spec.head_dim_p));
  }
}

double sm_entry(double dot, double inv_sqrt_p, std::size_t i, std::size_t j) {
  const double arg = dot * inv_sqrt_p;
  if (arg > kExpArgLimit) {
    throw OverflowError("softmax kernel overflow at entry (" + std::to_string(i) + ", " +
                        std::to_string(j) + "): exponent " + std::to_string(arg) + " exceeds " +
                        std::to_string(kExpArgLimit));
  }
  return std::exp(arg);
}

// Gaussian entry from the expanded square ||a-b||^2 = na - 2<a,b> + nb. The
// exact argument is never positive, so clamp the rounded one.
double gaussian_entry(double dot, double na, double nb, double half_inv_sqrt_p) {
  const double arg = std::min(0.0, (2.0 * dot - na - nb) * half_inv_sqrt_p);
  return std::exp(arg);
}

}  // namespace

const char* kernel_name(KernelKind kind) {
  return kind == KernelKind::SoftmaxSM ? "sm" : "gaussian";
}

DenseMatrix kernel_matrix(const KernelSpec& spec, const DenseMatrix& rows,
                          const DenseMatrix& cols) {
  if (&rows == &cols) return kernel_gram(spec, rows);
  check_inputs(spec, rows, cols, "kernel_matrix");
  const double sqrt_p = std::sqrt(static_cast<double>(spec.head_dim_p));
  DenseMatrix out = matmul_nt(rows, cols);
  if (spec.kind == KernelKind::SoftmaxSM) {
    const double inv_sqrt_p = 1.0 / sqrt_p;
    for (std::size_t i = 0; i < out.rows(); ++i) {
      double* row = out.row_ptr(i);
      for (std::size_t j = 0; j < out.cols(); ++j) row[j] = sm_entry(row[j], inv_sqrt_p, i, j);
    }
  } else {
    const std::vector<double> na = row_squared_norms(rows);
    const std::vector<double> nb = row_squared_norms(cols);
    const double half_inv_sqrt_p = 0.5 / sqrt_p;
    for (std::size_t i = 0; i < out.rows(); ++i) {
      double* row = out.row_ptr(i);
      for (std::size_t j = 0; j < out.cols(); ++j) {
        row[j] = gaussian_entry(row[j], na[i], nb[j], half_inv_sqrt_p);
      }
    }
  }
  return out;
}

DenseMatrix kernel_gram(const KernelSpec& spec, const DenseMatrix& x) {
  check_inputs(spec, x, x, "kernel_gram");
  const std::size_t n = x.rows();
  const double sqrt_p = std::sqrt(static_cast<double>(spec.head_dim_p));
  const std::vector<double> norms = row_squared_norms(x);
  DenseMatrix out(n, n);
  if (spec.kind == KernelKind::SoftmaxSM) {
    const double inv_sqrt_p = 1.0 / sqrt_p;
    for (std::size_t i = 0; i < n; ++i) {
      out(i, i) = sm_entry(norms[i], inv_sqrt_p, i, i);
      const double* xi = x.row_ptr(i);
      for (std::size_t j = i + 1; j < n; ++j) {
        const double* xj = x.row_ptr(j);
        double dot = 0.0;
        for (std::size_t k = 0; k < x.cols(); ++k) dot += xi[k] * xj[k];
        const double value = sm_entry(dot, inv_sqrt_p, i, j);
        out(i, j) = value;
        out(j, i) = value;
      }
    }
  } else {
    const double half_inv_sqrt_p = 0.5 / sqrt_p;
    for (std::size_t i = 0; i < n; ++i) {
      out(i, i) = 1.0;
      const double* xi = x.row_ptr(i);
      for (std::size_t j = i + 1; j < n; ++j) {
        const double* xj = x.row_ptr(j);
        double dot = 0.0;
        for (std::size_t k = 0; k < x.cols(); ++k) dot += xi[k] * xj[k];
        const double value = gaussian_entry(dot, norms[i], norms[j], half_inv_sqrt_p);
        out(i, j) = value;
        out(j, i) = value;
      }
    }
  }
  return out;
}

std::vector<double> diag_exp_norms(const KernelSpec& spec, const DenseMatrix& m) {
  check_inputs(spec, m, m, "diag_exp_norms");
  const double inv_sqrt_p = 1.0 / std::sqrt(static_cast<double>(spec.head_dim_p));
  std::vector<double> norms = row_squared_norms(m);
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double arg = norms[i] * inv_sqrt_p;
    if (arg > kExpArgLimit) {
      throw OverflowError("diag_exp_norms: row " + std::to_string(i) + " has exponent " +
                          std::to_string(arg) + " exceeding " + std::to_string(kExpArgLimit));
    }
    out[i] = std::exp(arg);
  }
  return out;
}

DenseMatrix sm_from_gaussian(const DenseMatrix& q, const DenseMatrix& k, std::size_t head_dim_p) {
  const KernelSpec gauss{KernelKind::Gaussian, head_dim_p};
  check_inputs(gauss, q, k, "sm_from_gaussian");
  const std::vector<double> dq = diag_exp_norms(gauss, q);
  const std::vector<double> dk = diag_exp_norms(gauss, k);
  DenseMatrix out = kernel_matrix(gauss, q, k);
  std::vector<double> sq(dq.size()), sk(dk.size());
  for (std::size_t i = 0; i < dq.size(); ++i) sq[i] = std::sqrt(dq[i]);
  for (std::size_t j = 0; j < dk.size(); ++j) sk[j] = std::sqrt(dk[j]);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double* row = out.row_ptr(i);
    for (std::size_t j = 0; j < out.cols(); ++j) row[j] *= sq[i] * sk[j];
  }
  return out;
}

}  // namespace sketchattn
