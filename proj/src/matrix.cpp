#include "sketchattn/matrix.hpp"

#include <cmath>
#include <string>

#include "sketchattn/errors.hpp"

namespace sketchattn {

namespace {

std::string shape_str(const DenseMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_nonempty(const DenseMatrix& m, const char* op) {
  if (m.empty()) throw ShapeError(std::string(op) + ": empty matrix");
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  DenseMatrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("from_rows: ragged initializer");
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool DenseMatrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require_nonempty(a, "matmul");
  require_nonempty(b, "matmul");
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions disagree, " + shape_str(a) + " * " + shape_str(b));
  }
  DenseMatrix c(a.rows(), b.cols(), 0.0);
  const std::size_t kdim = a.cols(), jdim = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* crow = c.row_ptr(i);
    for (std::size_t k = 0; k < kdim; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.row_ptr(k);
      for (std::size_t j = 0; j < jdim; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  require_nonempty(a, "matmul_nt");
  require_nonempty(b, "matmul_nt");
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_nt: inner dimensions disagree, " + shape_str(a) + " * " +
                     shape_str(b) + "^T");
  }
  DenseMatrix c(a.rows(), b.rows());
  const std::size_t kdim = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* arow = a.row_ptr(i);
    double* crow = c.row_ptr(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* brow = b.row_ptr(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < kdim; ++k) acc += arow[k] * brow[k];
      crow[j] = acc;
    }
  }
  return c;
}

DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("subtract: shapes disagree, " + shape_str(a) + " vs " + shape_str(b));
  }
  DenseMatrix c(a.rows(), a.cols());
  auto sa = a.data(), sb = b.data();
  auto sc = c.data();
  for (std::size_t i = 0; i < sc.size(); ++i) sc[i] = sa[i] - sb[i];
  return c;
}

DenseMatrix stack_rows(const DenseMatrix& top, const DenseMatrix& bottom) {
  if (top.cols() != bottom.cols()) {
    throw ShapeError("stack_rows: column counts disagree, " + shape_str(top) + " vs " +
                     shape_str(bottom));
  }
  DenseMatrix s(top.rows() + bottom.rows(), top.cols());
  for (std::size_t i = 0; i < top.rows(); ++i)
    for (std::size_t j = 0; j < top.cols(); ++j) s(i, j) = top(i, j);
  for (std::size_t i = 0; i < bottom.rows(); ++i)
    for (std::size_t j = 0; j < bottom.cols(); ++j) s(top.rows() + i, j) = bottom(i, j);
  return s;
}

DenseMatrix select_rows(const DenseMatrix& m, std::span<const std::size_t> indices) {
  require_nonempty(m, "select_rows");
  DenseMatrix s(indices.size(), m.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= m.rows()) {
      throw ShapeError("select_rows: index " + std::to_string(indices[i]) + " out of range for " +
                       shape_str(m));
    }
    const double* src = m.row_ptr(indices[i]);
    double* dst = s.row_ptr(i);
    for (std::size_t j = 0; j < m.cols(); ++j) dst[j] = src[j];
  }
  return s;
}

void add_scaled_identity(DenseMatrix& m, double shift) {
  if (m.rows() != m.cols()) throw ShapeError("add_scaled_identity: matrix not square");
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += shift;
}

std::vector<double> matvec(const DenseMatrix& m, std::span<const double> v) {
  if (v.size() != m.cols()) throw ShapeError("matvec: vector length mismatch");
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* row = m.row_ptr(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) acc += row[j] * v[j];
    out[i] = acc;
  }
  return out;
}

std::vector<double> matvec_t(const DenseMatrix& m, std::span<const double> v) {
  if (v.size() != m.rows()) throw ShapeError("matvec_t: vector length mismatch");
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double vi = v[i];
    if (vi == 0.0) continue;
    const double* row = m.row_ptr(i);
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += vi * row[j];
  }
  return out;
}

std::vector<double> row_sums(const DenseMatrix& m) {
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* row = m.row_ptr(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) acc += row[j];
    out[i] = acc;
  }
  return out;
}

std::vector<double> row_squared_norms(const DenseMatrix& m) {
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* row = m.row_ptr(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) acc += row[j] * row[j];
    out[i] = acc;
  }
  return out;
}

double frobenius_norm(const DenseMatrix& m) {
  double acc = 0.0;
  for (double v : m.data()) acc += v * v;
  return std::sqrt(acc);
}

double max_abs(const DenseMatrix& m) {
  double acc = 0.0;
  for (double v : m.data()) acc = std::max(acc, std::abs(v));
  return acc;
}

double relative_frobenius(const DenseMatrix& a, const DenseMatrix& b) {
  const double ref = frobenius_norm(b);
  const double diff = frobenius_norm(subtract(a, b));
  return ref > 0.0 ? diff / ref : diff;
}

}  // namespace sketchattn
