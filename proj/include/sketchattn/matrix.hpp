#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace sketchattn {

/// Row-major dense real matrix. Carrier type for inputs (Q, K, V), kernel
/// matrices and low-rank factors. Plain value semantics, contiguous storage.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }
  const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool all_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// a * b. Fixed accumulation order (k ascending) so results are bitwise
/// reproducible across runs and thread counts.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

/// a * b^T without forming the transpose; both operands read by rows, which is
/// the layout kernel evaluation wants.
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix transpose(const DenseMatrix& m);
DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix stack_rows(const DenseMatrix& top, const DenseMatrix& bottom);
DenseMatrix select_rows(const DenseMatrix& m, std::span<const std::size_t> indices);

/// m += shift * I.
void add_scaled_identity(DenseMatrix& m, double shift);

std::vector<double> matvec(const DenseMatrix& m, std::span<const double> v);
std::vector<double> matvec_t(const DenseMatrix& m, std::span<const double> v);
std::vector<double> row_sums(const DenseMatrix& m);
std::vector<double> row_squared_norms(const DenseMatrix& m);

double frobenius_norm(const DenseMatrix& m);
double max_abs(const DenseMatrix& m);

/// ||a - b||_F / ||b||_F, with a zero reference falling back to the absolute
/// difference. Shared by tests and the error sweeps.
double relative_frobenius(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace sketchattn
