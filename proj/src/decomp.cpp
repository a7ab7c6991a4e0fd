#include "sketchattn/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "sketchattn/errors.hpp"

namespace sketchattn {

namespace {

void require_square(const DenseMatrix& m, const char* op) {
  if (m.empty()) throw ShapeError(std::string(op) + ": empty matrix");
  if (m.rows() != m.cols()) {
    throw ShapeError(std::string(op) + ": matrix is " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + ", expected square");
  }
}

double relative_asymmetry(const DenseMatrix& m) {
  double diff = 0.0, total = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      total += v * v;
      const double d = v - m(j, i);
      diff += d * d;
    }
  }
  return total > 0.0 ? std::sqrt(diff / total) : 0.0;
}

DenseMatrix symmetrized(const DenseMatrix& m, const char* op) {
  require_square(m, op);
  const double asym = relative_asymmetry(m);
  if (asym > kSymmetryTol) {
    throw std::invalid_argument(std::string(op) + ": input asymmetry " + std::to_string(asym) +
                                " exceeds tolerance");
  }
  DenseMatrix a(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) a(i, j) = 0.5 * (m(i, j) + m(j, i));
  return a;
}

void sort_descending(SymmetricEigen& eig) {
  const std::size_t n = eig.eigenvalues.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return eig.eigenvalues[a] > eig.eigenvalues[b];
  });
  std::vector<double> values(n);
  DenseMatrix vectors(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    values[k] = eig.eigenvalues[order[k]];
    for (std::size_t i = 0; i < n; ++i) vectors(i, k) = eig.eigenvectors(i, order[k]);
  }
  eig.eigenvalues = std::move(values);
  eig.eigenvectors = std::move(vectors);
}

double off_diagonal_norm(const DenseMatrix& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) acc += 2.0 * a(i, j) * a(i, j);
  return std::sqrt(acc);
}

// Householder reduction of a symmetric matrix to tridiagonal form (diag in
// d, subdiagonal in e). Eigenvector accumulation is deferred: step i's
// reflector stays in row i of `a` with its normalizer in hcoef[i], so the
// back-transformation can run later as contiguous row operations instead of
// the usual column-strided accumulation.
void tridiagonal_reduce(DenseMatrix& a, std::vector<double>& d, std::vector<double>& e,
                        std::vector<double>& hcoef) {
  const std::size_t n = a.rows();
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (std::size_t k = 0; k < i; ++k) scale += std::abs(a(i, k));
      if (scale == 0.0) {
        e[i] = a(i, l);
      } else {
        for (std::size_t k = 0; k < i; ++k) {
          a(i, k) /= scale;
          h += a(i, k) * a(i, k);
        }
        double f = a(i, l);
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        a(i, l) = f - g;
        f = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
          g = 0.0;
          for (std::size_t k = 0; k < j + 1; ++k) g += a(j, k) * a(i, k);
          for (std::size_t k = j + 1; k < i; ++k) g += a(k, j) * a(i, k);
          e[j] = g / h;
          f += e[j] * a(i, j);
        }
        const double hh = f / (h + h);
        for (std::size_t j = 0; j < i; ++j) {
          f = a(i, j);
          e[j] = g = e[j] - hh * f;
          for (std::size_t k = 0; k < j + 1; ++k) a(j, k) -= f * e[k] + g * a(i, k);
        }
      }
    } else {
      e[i] = a(i, l);
    }
    hcoef[i] = h;
  }
  hcoef[0] = 0.0;
  e[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i);
}

// Implicit-shift QL sweeps on the tridiagonal (d, e). Rotations accumulate
// into the ROWS of r (r starts as identity and ends as the transpose of the
// tridiagonal eigenvector matrix); row pairs are contiguous in memory, which
// is what keeps the O(n^3) accumulation fast.
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, DenseMatrix& r) {
  const std::size_t n = d.size();
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    std::size_t iterations = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iterations++ == 50) throw std::runtime_error("tridiagonal_ql: too many iterations");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double rr = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::abs(rr) : -std::abs(rr)));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (std::size_t ii = m; ii-- > l;) {
          double f = s * e[ii];
          const double b = c * e[ii];
          e[ii + 1] = rr = std::hypot(f, g);
          if (rr == 0.0) {
            d[ii + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / rr;
          c = g / rr;
          g = d[ii + 1] - p;
          rr = (d[ii] - g) * s + 2.0 * c * b;
          d[ii + 1] = g + (p = s * rr);
          g = c * rr - b;
          double* lo = r.row_ptr(ii);
          double* hi = r.row_ptr(ii + 1);
          for (std::size_t k = 0; k < n; ++k) {
            f = hi[k];
            hi[k] = s * lo[k] + c * f;
            lo[k] = c * lo[k] - s * f;
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

// Pseudoinverse of a (near-)symmetric matrix through its eigendecomposition;
// eigenvalues keep their sign so indefinite inputs are handled correctly.
DenseMatrix pinv_symmetric(const DenseMatrix& m, double rcond) {
  const SymmetricEigen eig = sym_eigen_tridiag(m);
  const std::size_t n = m.rows();
  double amax = 0.0;
  for (double v : eig.eigenvalues) amax = std::max(amax, std::abs(v));
  const double cutoff = rcond * amax;
  DenseMatrix scaled(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double lambda = eig.eigenvalues[k];
      if (std::abs(lambda) > cutoff && lambda != 0.0) {
        scaled(i, k) = eig.eigenvectors(i, k) / lambda;
      }
    }
  }
  return matmul_nt(scaled, eig.eigenvectors);
}

// General pseudoinverse via the Gram matrix of the smaller side. The Gram
// route only resolves singular values down to about sqrt(eps) * sigma_max,
// so the truncation cutoff is floored there to keep noise directions out.
DenseMatrix pinv_gram(const DenseMatrix& m, double rcond) {
  if (m.rows() < m.cols()) return transpose(pinv_gram(transpose(m), rcond));
  const DenseMatrix mt = transpose(m);
  const DenseMatrix gram = matmul_nt(mt, mt);
  const SymmetricEigen eig = sym_eigen_tridiag(gram);
  const std::size_t c = m.cols();
  double lmax = 0.0;
  for (double v : eig.eigenvalues) lmax = std::max(lmax, v);
  constexpr double kGramResolutionFloor = 1e-13;
  const double cutoff = std::max(rcond * rcond, kGramResolutionFloor) * lmax;
  DenseMatrix scaled(c, c, 0.0);
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t k = 0; k < c; ++k) {
      const double lambda = eig.eigenvalues[k];
      if (lambda > cutoff) scaled(i, k) = eig.eigenvectors(i, k) / lambda;
    }
  }
  const DenseMatrix w = matmul_nt(scaled, eig.eigenvectors);
  return matmul_nt(w, m);
}

}  // namespace

SpectralNormEstimate spectral_norm_estimate(const DenseMatrix& m, double tol,
                                            std::size_t max_iters) {
  if (m.empty()) throw ShapeError("spectral_norm: empty matrix");
  if (tol <= 0.0) throw std::invalid_argument("spectral_norm: tol must be positive");
  const std::size_t c = m.cols();
  std::vector<double> v(c, 1.0 / std::sqrt(static_cast<double>(c)));
  SpectralNormEstimate est;
  double previous = -1.0;
  bool retried_basis_start = false;
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    std::vector<double> w = matvec(m, v);
    double sigma = 0.0;
    for (double x : w) sigma += x * x;
    sigma = std::sqrt(sigma);
    est.value = sigma;
    est.iterations = iter + 1;
    if (sigma == 0.0) {
      // The all-ones start can be exactly orthogonal to the top singular
      // direction; restart once from the heaviest column's basis vector.
      if (!retried_basis_start && frobenius_norm(m) > 0.0) {
        retried_basis_start = true;
        std::vector<double> col_norms(c, 0.0);
        for (std::size_t i = 0; i < m.rows(); ++i)
          for (std::size_t j = 0; j < c; ++j) col_norms[j] += m(i, j) * m(i, j);
        const std::size_t jmax =
            std::max_element(col_norms.begin(), col_norms.end()) - col_norms.begin();
        std::fill(v.begin(), v.end(), 0.0);
        v[jmax] = 1.0;
        previous = -1.0;
        continue;
      }
      est.converged = true;
      return est;
    }
    if (previous >= 0.0 && std::abs(sigma - previous) <= tol * sigma) {
      est.converged = true;
      return est;
    }
    previous = sigma;
    std::vector<double> u = matvec_t(m, w);
    double unorm = 0.0;
    for (double x : u) unorm += x * x;
    unorm = std::sqrt(unorm);
    for (std::size_t j = 0; j < c; ++j) v[j] = u[j] / unorm;
  }
  return est;
}

double spectral_norm(const DenseMatrix& m, double tol, std::size_t max_iters) {
  return spectral_norm_estimate(m, tol, max_iters).value;
}

SymmetricEigen sym_eigen(const DenseMatrix& m) {
  DenseMatrix a = symmetrized(m, "sym_eigen");
  const std::size_t n = a.rows();
  DenseMatrix v = DenseMatrix::identity(n);
  const double total = std::max(frobenius_norm(a), std::numeric_limits<double>::min());
  constexpr std::size_t kMaxSweeps = 60;
  std::size_t sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= 1e-14 * total) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double sign = theta >= 0.0 ? 1.0 : -1.0;
        const double t = sign / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        const double app = a(p, p), aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = akp - s * (akq + tau * akp);
          a(k, q) = akq + s * (akp - tau * akq);
          a(p, k) = a(k, p);
          a(q, k) = a(k, q);
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp - s * (vkq + tau * vkp);
          v(k, q) = vkq + s * (vkp - tau * vkq);
        }
      }
    }
  }
  if (sweep == kMaxSweeps) throw std::runtime_error("sym_eigen: Jacobi sweeps did not converge");
  SymmetricEigen eig;
  eig.eigenvalues.resize(n);
  for (std::size_t i = 0; i < n; ++i) eig.eigenvalues[i] = a(i, i);
  eig.eigenvectors = std::move(v);
  sort_descending(eig);
  return eig;
}

SymmetricEigen sym_eigen_tridiag(const DenseMatrix& m) {
  DenseMatrix a = symmetrized(m, "sym_eigen_tridiag");
  const std::size_t n = a.rows();
  if (n == 1) {
    SymmetricEigen eig;
    eig.eigenvalues = {a(0, 0)};
    eig.eigenvectors = DenseMatrix::identity(1);
    return eig;
  }
  std::vector<double> d(n, 0.0), e(n, 0.0), hcoef(n, 0.0);
  tridiagonal_reduce(a, d, e, hcoef);
  DenseMatrix r = DenseMatrix::identity(n);
  tridiagonal_ql(d, e, r);
  // Fold the deferred Householder reflectors into the rows of r, oldest
  // reflector first, so each row ends up as an eigenvector of the input.
  for (std::size_t i = 2; i < n; ++i) {
    if (hcoef[i] == 0.0) continue;
    const double* u = a.row_ptr(i);
    const double inv_h = 1.0 / hcoef[i];
    for (std::size_t row = 0; row < n; ++row) {
      double* rp = r.row_ptr(row);
      double w = 0.0;
      for (std::size_t k = 0; k < i; ++k) w += rp[k] * u[k];
      w *= inv_h;
      for (std::size_t k = 0; k < i; ++k) rp[k] -= w * u[k];
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&d](std::size_t x, std::size_t y) { return d[x] > d[y]; });
  SymmetricEigen eig;
  eig.eigenvalues.resize(n);
  eig.eigenvectors = DenseMatrix(n, n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    eig.eigenvalues[k] = d[order[k]];
    const double* src = r.row_ptr(order[k]);
    for (std::size_t i = 0; i < n; ++i) eig.eigenvectors(i, k) = src[i];
  }
  return eig;
}

DenseMatrix pinv(const DenseMatrix& m, double rcond) {
  if (m.empty()) throw ShapeError("pinv: empty matrix");
  if (rcond < 0.0) throw std::invalid_argument("pinv: rcond must be non-negative");
  if (m.rows() == m.cols() && relative_asymmetry(m) <= kSymmetryTol) {
    return pinv_symmetric(m, rcond);
  }
  return pinv_gram(m, rcond);
}

std::vector<double> singular_value_spectrum(const DenseMatrix& m) {
  if (m.empty()) throw ShapeError("singular_value_spectrum: empty matrix");
  const bool tall = m.rows() >= m.cols();
  DenseMatrix gram;
  if (tall) {
    const DenseMatrix mt = transpose(m);
    gram = matmul_nt(mt, mt);
  } else {
    gram = matmul_nt(m, m);
  }
  SymmetricEigen eig = sym_eigen_tridiag(gram);
  std::vector<double> sigma(eig.eigenvalues.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    sigma[i] = std::sqrt(std::max(eig.eigenvalues[i], 0.0));
  }
  return sigma;
}

DenseMatrix cholesky_factor(const DenseMatrix& spd) {
  require_square(spd, "cholesky_factor");
  const std::size_t n = spd.rows();
  DenseMatrix l(n, n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = spd(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (diag <= 0.0) {
      throw std::runtime_error("cholesky_factor: pivot " + std::to_string(j) +
                               " is not positive; matrix is not positive definite");
    }
    l(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double acc = spd(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
      l(i, j) = acc / l(j, j);
    }
  }
  return l;
}

DenseMatrix cholesky_solve(const DenseMatrix& lower, const DenseMatrix& b) {
  require_square(lower, "cholesky_solve");
  if (b.rows() != lower.rows()) throw ShapeError("cholesky_solve: right-hand side rows mismatch");
  const std::size_t n = lower.rows(), m = b.cols();
  DenseMatrix x = b;
  // forward substitution L y = b
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < m; ++c) {
      double acc = x(i, c);
      for (std::size_t k = 0; k < i; ++k) acc -= lower(i, k) * x(k, c);
      x(i, c) = acc / lower(i, i);
    }
  }
  // back substitution L^T x = y
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t c = 0; c < m; ++c) {
      double acc = x(i, c);
      for (std::size_t k = i + 1; k < n; ++k) acc -= lower(k, i) * x(k, c);
      x(i, c) = acc / lower(i, i);
    }
  }
  return x;
}

}  // namespace sketchattn
