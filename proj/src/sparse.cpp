#include "egstokes/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace egs {

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets) {
  SparseMatrix m(rows, cols);
  for (const auto &t : triplets) {
    if (t.row < 0 || static_cast<std::size_t>(t.row) >= rows || t.col < 0 ||
        static_cast<std::size_t>(t.col) >= cols)
      throw LinearAlgebraError("triplet index out of range");
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet &a, const Triplet &b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  m.columns_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  std::size_t k = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    while (k < triplets.size() && static_cast<std::size_t>(triplets[k].row) == r) {
      const int c = triplets[k].col;
      double v = 0.0;
      while (k < triplets.size() && static_cast<std::size_t>(triplets[k].row) == r &&
             triplets[k].col == c)
        v += triplets[k++].value;
      m.columns_.push_back(c);
      m.values_.push_back(v);
    }
    m.offsets_[r + 1] = m.columns_.size();
  }
  return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<double> ones(n, 1.0);
  return diagonal(ones);
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> d) {
  SparseMatrix m(d.size(), d.size());
  m.columns_.resize(d.size());
  m.values_.assign(d.begin(), d.end());
  for (std::size_t i = 0; i < d.size(); ++i) {
    m.columns_[i] = static_cast<int>(i);
    m.offsets_[i + 1] = i + 1;
  }
  return m;
}

double SparseMatrix::coeff(std::size_t i, std::size_t j) const {
  const auto begin = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
  const auto end = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
  const auto it = std::lower_bound(begin, end, static_cast<int>(j));
  if (it == end || *it != static_cast<int>(j)) return 0.0;
  return values_[static_cast<std::size_t>(it - columns_.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) s += values_[k] * x[columns_[k]];
    y[i] = s;
  }
}

void SparseMatrix::multiply_add(double a, std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) s += values_[k] * x[columns_[k]];
    y[i] += a * s;
  }
}

std::vector<double> SparseMatrix::operator*(std::span<const double> x) const {
  std::vector<double> y(rows_);
  multiply(x, y);
  return y;
}

std::vector<double> SparseMatrix::diagonal_values() const {
  std::vector<double> d(std::min(rows_, cols_), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = coeff(i, i);
  return d;
}

SparseMatrix SparseMatrix::transpose() const {
  SparseMatrix t(cols_, rows_);
  std::vector<std::size_t> count(cols_ + 1, 0);
  for (int c : columns_) ++count[static_cast<std::size_t>(c) + 1];
  std::partial_sum(count.begin(), count.end(), count.begin());
  t.offsets_ = count;
  t.columns_.resize(nnz());
  t.values_.resize(nnz());
  std::vector<std::size_t> next(count.begin(), count.end() - 1);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      const auto dst = next[static_cast<std::size_t>(columns_[k])]++;
      t.columns_[dst] = static_cast<int>(i);
      t.values_[dst] = values_[k];
    }
  }
  return t;
}

SparseMatrix SparseMatrix::leading_block(std::size_t n) const {
  SparseMatrix b(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      if (static_cast<std::size_t>(columns_[k]) < n) {
        b.columns_.push_back(columns_[k]);
        b.values_.push_back(values_[k]);
      }
    }
    b.offsets_[i + 1] = b.columns_.size();
  }
  return b;
}

SparseMatrix SparseMatrix::symmetric_part() const { return add(*this, 0.5, transpose(), 0.5); }

SparseMatrix SparseMatrix::scaled(double s) const {
  SparseMatrix m = *this;
  for (double &v : m.values_) v *= s;
  return m;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

void SparseMatrix::check() const {
  if (offsets_.size() != rows_ + 1 || offsets_.front() != 0 || offsets_.back() != nnz() ||
      columns_.size() != values_.size())
    throw LinearAlgebraError("inconsistent CSR dimensions");
  for (std::size_t i = 0; i < rows_; ++i) {
    if (offsets_[i] > offsets_[i + 1]) throw LinearAlgebraError("CSR offsets not monotone");
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      if (columns_[k] < 0 || static_cast<std::size_t>(columns_[k]) >= cols_)
        throw LinearAlgebraError("CSR column index out of range");
      if (k > offsets_[i] && columns_[k] <= columns_[k - 1])
        throw LinearAlgebraError("CSR columns not sorted and unique");
    }
  }
}

SparseMatrix multiply(const SparseMatrix &a, const SparseMatrix &b) {
  if (a.cols_ != b.rows_) throw LinearAlgebraError("dimension mismatch in sparse product");
  SparseMatrix c(a.rows_, b.cols_);
  std::vector<int> marker(b.cols_, -1);
  std::vector<double> acc(b.cols_, 0.0);
  std::vector<int> pattern;
  for (std::size_t i = 0; i < a.rows_; ++i) {
    pattern.clear();
    for (std::size_t ka = a.offsets_[i]; ka < a.offsets_[i + 1]; ++ka) {
      const auto j = static_cast<std::size_t>(a.columns_[ka]);
      const double av = a.values_[ka];
      for (std::size_t kb = b.offsets_[j]; kb < b.offsets_[j + 1]; ++kb) {
        const int col = b.columns_[kb];
        if (marker[col] != static_cast<int>(i)) {
          marker[col] = static_cast<int>(i);
          acc[col] = 0.0;
          pattern.push_back(col);
        }
        acc[col] += av * b.values_[kb];
      }
    }
    std::sort(pattern.begin(), pattern.end());
    for (int col : pattern) {
      c.columns_.push_back(col);
      c.values_.push_back(acc[col]);
    }
    c.offsets_[i + 1] = c.columns_.size();
  }
  return c;
}

SparseMatrix add(const SparseMatrix &a, double sa, const SparseMatrix &b, double sb) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
    throw LinearAlgebraError("dimension mismatch in sparse sum");
  SparseMatrix c(a.rows_, a.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i) {
    std::size_t ka = a.offsets_[i], kb = b.offsets_[i];
    const std::size_t ea = a.offsets_[i + 1], eb = b.offsets_[i + 1];
    while (ka < ea || kb < eb) {
      int col;
      double v = 0.0;
      if (kb >= eb || (ka < ea && a.columns_[ka] < b.columns_[kb])) {
        col = a.columns_[ka];
        v = sa * a.values_[ka++];
      } else if (ka >= ea || b.columns_[kb] < a.columns_[ka]) {
        col = b.columns_[kb];
        v = sb * b.values_[kb++];
      } else {
        col = a.columns_[ka];
        v = sa * a.values_[ka++] + sb * b.values_[kb++];
      }
      c.columns_.push_back(col);
      c.values_.push_back(v);
    }
    c.offsets_[i + 1] = c.columns_.size();
  }
  return c;
}

namespace vec {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void scale(double a, std::span<double> x) {
  for (double &v : x) v *= a;
}

}  // namespace vec

}  // namespace egs
