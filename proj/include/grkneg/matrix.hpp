#pragma once

// Dense row-major matrix plus the kernel primitives built on it: RBF kernel
// evaluation and reference-set centering of square and cross kernels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace grkneg {

// Thrown when operand shapes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("Matrix: data length " + std::to_string(data_.size()) +
                           " does not match " + std::to_string(rows_) + "x" +
                           std::to_string(cols_));
    }
  }

  // Row-wise literal, e.g. Matrix{{1, 2}, {3, 4}}.
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionError("Matrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }
  bool is_square() const { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> col(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  // Columns listed in `idx`, in that order.
  Matrix select_cols(std::span<const std::size_t> idx) const {
    Matrix out(rows_, idx.size());
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t j = 0; j < idx.size(); ++j) out(r, j) = (*this)(r, idx[j]);
    return out;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.all_finite()) throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

// [a | b], both with the same row count.
inline Matrix hconcat(const Matrix& a, const Matrix& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.rows() != b.rows()) throw DimensionError("hconcat: row counts differ");
  Matrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    std::copy(a.row(r).begin(), a.row(r).end(), out.row(r).begin());
    std::copy(b.row(r).begin(), b.row(r).end(), out.row(r).begin() + a.cols());
  }
  return out;
}

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

// aᵀ·b without materializing the transpose.
inline Matrix transpose_times(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("transpose_times: row counts differ");
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto ak = a.row(k);
    auto bk = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = ak[i];
      if (aki == 0.0) continue;
      auto ci = c.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("subtract: shape mismatch");
  Matrix c = a;
  for (std::size_t i = 0; i < c.data().size(); ++i) c.data()[i] -= b.data()[i];
  return c;
}

inline Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("add: shape mismatch");
  Matrix c = a;
  for (std::size_t i = 0; i < c.data().size(); ++i) c.data()[i] += b.data()[i];
  return c;
}

inline Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (double& v : c.data()) v *= s;
  return c;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

inline bool is_symmetric(const Matrix& k, double tol) {
  if (!k.is_square()) return false;
  for (std::size_t i = 0; i < k.rows(); ++i)
    for (std::size_t j = i + 1; j < k.cols(); ++j)
      if (std::abs(k(i, j) - k(j, i)) > tol) return false;
  return true;
}

inline Matrix symmetrize(const Matrix& k) {
  if (!k.is_square()) throw DimensionError("symmetrize: matrix is not square");
  Matrix s = k;
  for (std::size_t i = 0; i < k.rows(); ++i)
    for (std::size_t j = i + 1; j < k.cols(); ++j) s(i, j) = s(j, i) = 0.5 * (k(i, j) + k(j, i));
  return s;
}

// Squared Euclidean distances between the columns of a (D×M) and b (D×N).
inline Matrix pairwise_sq_dist(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("pairwise_sq_dist: feature dimensions differ");
  const Matrix at = a.transpose();
  const Matrix bt = b.transpose();
  Matrix d(a.cols(), b.cols());
  for (std::size_t i = 0; i < at.rows(); ++i) {
    auto x = at.row(i);
    for (std::size_t j = 0; j < bt.rows(); ++j) {
      auto y = bt.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) {
        const double t = x[k] - y[k];
        s += t * t;
      }
      d(i, j) = s;
    }
  }
  return d;
}

// exp(-|a_i - b_j|^2 / (2 sigma^2)) over the columns of a and b.
inline Matrix rbf_kernel(const Matrix& a, const Matrix& b, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("rbf_kernel: sigma must be positive and finite");
  }
  Matrix k = pairwise_sq_dist(a, b);
  const double scale = -1.0 / (2.0 * sigma * sigma);
  for (double& v : k.data()) v = std::exp(v * scale);
  return k;
}

// (I - 11ᵀ/R) K (I - 11ᵀ/R).
inline Matrix center_square_kernel(const Matrix& k) {
  if (!k.is_square()) throw DimensionError("center_square_kernel: matrix is not square");
  const std::size_t n = k.rows();
  if (n == 0) return k;
  std::vector<double> row_mean(n, 0.0), col_mean(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      row_mean[i] += k(i, j);
      col_mean[j] += k(i, j);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    total += row_mean[i];
    row_mean[i] /= static_cast<double>(n);
    col_mean[i] /= static_cast<double>(n);
  }
  total /= static_cast<double>(n * n);
  Matrix c(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c(i, j) = k(i, j) - row_mean[i] - col_mean[j] + total;
  // Exact symmetry for symmetric input; rounding in the two mean vectors can differ.
  return symmetrize(c);
}

// Cross kernel between reference set R and points X, centered at the mean of
// the reference feature maps:
//   k(r_i,x_j) - mean_k k(r_k,x_j) - mean_k k(r_i,r_k) + mean_kl k(r_k,r_l).
inline Matrix center_cross_kernel(const Matrix& k_rr, const Matrix& k_rx) {
  if (!k_rr.is_square()) throw DimensionError("center_cross_kernel: k_rr is not square");
  if (k_rx.rows() != k_rr.rows()) {
    throw DimensionError("center_cross_kernel: k_rx has " + std::to_string(k_rx.rows()) +
                         " rows, expected " + std::to_string(k_rr.rows()));
  }
  const std::size_t r = k_rr.rows();
  const std::size_t x = k_rx.cols();
  if (r == 0) return k_rx;
  const double inv_r = 1.0 / static_cast<double>(r);
  std::vector<double> ref_row_mean(r, 0.0);
  double ref_total = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t k = 0; k < r; ++k) ref_row_mean[i] += k_rr(i, k);
    ref_total += ref_row_mean[i];
    ref_row_mean[i] *= inv_r;
  }
  ref_total *= inv_r * inv_r;
  std::vector<double> col_mean(x, 0.0);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < x; ++j) col_mean[j] += k_rx(i, j);
  for (double& v : col_mean) v *= inv_r;
  Matrix c(r, x);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < x; ++j) c(i, j) = k_rx(i, j) - col_mean[j] - ref_row_mean[i] + ref_total;
  return c;
}

}  // namespace grkneg
