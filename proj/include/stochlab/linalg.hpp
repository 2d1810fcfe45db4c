#pragma once

#include <cstddef>
#include <vector>

namespace stochlab {

/// Dense row-major matrix of doubles. Sized for desk-scale problems
/// (dimensions up to a few thousand); no view machinery.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  const double* row_ptr(std::size_t r) const noexcept { return data_.data() + r * cols_; }
  double* row_ptr(std::size_t r) noexcept { return data_.data() + r * cols_; }

  std::vector<double> row(std::size_t r) const {
    return std::vector<double>(row_ptr(r), row_ptr(r) + cols_);
  }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
std::vector<double> matvec(const Matrix& m, const std::vector<double>& v);
std::vector<double> vecmat(const std::vector<double>& v, const Matrix& m);
double dot(const std::vector<double>& a, const std::vector<double>& b);
double max_abs_diff(const Matrix& a, const Matrix& b);

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // column j pairs with values[j]
};

/// Eigendecomposition of a symmetric matrix via Householder
/// tridiagonalization followed by implicit-shift QL. Fully deterministic;
/// the input is symmetrized as (A + A^T)/2 before reduction.
SymmetricEigen symmetric_eigen(const Matrix& a);

/// Count of eigenvalues above rel_tol * max(eigenvalue, 0).
std::size_t numerical_rank(const std::vector<double>& eigenvalues_desc, double rel_tol);

/// Spearman rank correlation of two equal-length samples (average ranks on ties).
double spearman_rank_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace stochlab
