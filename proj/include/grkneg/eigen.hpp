#pragma once

// Symmetric eigendecomposition by cyclic Jacobi rotations, and the
// Moore-Penrose pseudoinverse of a symmetric matrix built on it.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "grkneg/matrix.hpp"

namespace grkneg {

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultRankTol = 1e-10;

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // descending
  Matrix eigenvectors;              // column i pairs with eigenvalues[i]
  std::size_t rank = 0;             // count with lambda > rel_tol * lambda_max and lambda > 0
};

struct JacobiOptions {
  double off_tol = 1e-12;  // relative to the Frobenius norm of the input
  std::size_t max_rotations = 0;  // 0 means 100 * n^2
  double rank_tol = kDefaultRankTol;
};

inline std::size_t count_rank(const std::vector<double>& sorted_desc, double rel_tol) {
  if (sorted_desc.empty() || !(sorted_desc.front() > 0.0)) return 0;
  const double cut = rel_tol * sorted_desc.front();
  std::size_t r = 0;
  for (double v : sorted_desc) {
    if (v > cut && v > 0.0) ++r;
  }
  return r;
}

inline EigenDecomposition sym_eigen(const Matrix& input, const JacobiOptions& opt = {}) {
  if (!input.is_square()) throw DimensionError("sym_eigen: matrix is not square");
  const std::size_t n = input.rows();
  Matrix a = symmetrize(input);
  // Row i of vt is eigenvector i, so rotations touch contiguous memory.
  Matrix vt = Matrix::identity(n);

  double frob2 = 0.0;
  for (double v : a.data()) frob2 += v * v;
  const double target = opt.off_tol * std::sqrt(frob2);
  const std::size_t cap = opt.max_rotations ? opt.max_rotations : 100 * std::max<std::size_t>(n * n, 1);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return std::sqrt(2.0 * s);
  };

  std::size_t rotations = 0;
  double off = off_norm();
  while (off > target) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        if (++rotations > cap) {
          throw ConvergenceError("sym_eigen: no convergence after " + std::to_string(cap) +
                                 " rotations (off-diagonal norm " + std::to_string(off) + ")");
        }
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        auto rp = a.row(p);
        auto rq = a.row(q);
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = rp[k];
          const double akq = rq[k];
          const double np = c * akp - s * akq;
          const double nq = s * akp + c * akq;
          rp[k] = np;
          rq[k] = nq;
          a(k, p) = np;
          a(k, q) = nq;
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;

        auto vp = vt.row(p);
        auto vq = vt.row(q);
        for (std::size_t k = 0; k < n; ++k) {
          const double x = vp[k];
          const double y = vq[k];
          vp[k] = c * x - s * y;
          vq[k] = s * x + c * y;
        }
      }
    }
    off = off_norm();
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.eigenvalues[c] = a(order[c], order[c]);
    auto v = vt.row(order[c]);
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, c) = v[r];
  }
  out.rank = count_rank(out.eigenvalues, opt.rank_tol);
  return out;
}

// U_r diag(1/lambda_r) U_rᵀ over the eigenvalues above rel_tol * lambda_max.
// Non-positive eigenvalues are rounding artefacts of PSD inputs and are dropped.
inline Matrix pseudoinverse(const EigenDecomposition& eig) {
  const std::size_t n = eig.eigenvectors.rows();
  const std::size_t r = eig.rank;
  Matrix scaled(n, r);
  Matrix basis(n, r);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < r; ++c) {
      basis(i, c) = eig.eigenvectors(i, c);
      scaled(i, c) = eig.eigenvectors(i, c) / eig.eigenvalues[c];
    }
  }
  Matrix out = scaled * basis.transpose();
  return symmetrize(out);
}

inline Matrix pseudoinverse(const Matrix& k, double rel_tol = kDefaultRankTol) {
  if (!k.is_square()) throw DimensionError("pseudoinverse: matrix is not square");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw std::invalid_argument("pseudoinverse: rel_tol must be in (0,1)");
  JacobiOptions opt;
  opt.rank_tol = rel_tol;
  return pseudoinverse(sym_eigen(k, opt));
}

}  // namespace grkneg
