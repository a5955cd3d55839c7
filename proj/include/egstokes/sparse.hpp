#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace egs {

class LinearAlgebraError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed sparse row matrix. Column indices are sorted and unique within
/// each row.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), offsets_(rows + 1, 0) {}

  /// Duplicates are summed; explicit zeros are kept so the pattern does not
  /// depend on cancellation.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);
  static SparseMatrix identity(std::size_t n);
  static SparseMatrix diagonal(std::span<const double> d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> offsets() const { return offsets_; }
  std::span<const int> columns() const { return columns_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// Entry (i, j), zero if not stored.
  double coeff(std::size_t i, std::size_t j) const;

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  /// y += a * A x
  void multiply_add(double a, std::span<const double> x, std::span<double> y) const;
  std::vector<double> operator*(std::span<const double> x) const;

  std::vector<double> diagonal_values() const;
  SparseMatrix transpose() const;
  /// Rows and columns [0, n).
  SparseMatrix leading_block(std::size_t n) const;
  /// (A + A^T) / 2
  SparseMatrix symmetric_part() const;
  SparseMatrix scaled(double s) const;
  /// Largest |a_ij|.
  double max_abs() const;

  /// Validates the CSR invariants; throws LinearAlgebraError on violation.
  void check() const;

 private:
  friend SparseMatrix multiply(const SparseMatrix &a, const SparseMatrix &b);
  friend SparseMatrix add(const SparseMatrix &a, double sa, const SparseMatrix &b, double sb);

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<int> columns_;
  std::vector<double> values_;
};

/// Sparse product A * B.
SparseMatrix multiply(const SparseMatrix &a, const SparseMatrix &b);
/// sa * A + sb * B.
SparseMatrix add(const SparseMatrix &a, double sa, const SparseMatrix &b, double sb);

namespace vec {

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(double a, std::span<double> x);

}  // namespace vec

}  // namespace egs
