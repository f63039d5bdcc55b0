#pragma once

// Independent reference implementations used by the tests. They share no
// numerical code with the library: linear algebra goes through Eigen, the SVM
// duals are solved by accelerated projected gradient.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "grkneg/matrix.hpp"

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline Mat to_eigen(const grkneg::Matrix& m) {
  Mat out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

inline grkneg::Matrix from_eigen(const Mat& m) {
  grkneg::Matrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

inline double max_abs_diff(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline grkneg::Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  grkneg::Matrix m(rows, cols);
  for (double& v : m.data()) v = nd(gen);
  return m;
}

// Random symmetric PSD matrix of the given rank.
inline grkneg::Matrix random_psd(std::size_t n, std::size_t rank, std::mt19937_64& gen) {
  const Mat f = to_eigen(random_matrix(n, rank, gen));
  return from_eigen(f * f.transpose());
}

// RBF kernel by explicit double loop over columns.
inline Mat rbf(const Mat& a, const Mat& b, double sigma) {
  Mat k(a.cols(), b.cols());
  for (Eigen::Index i = 0; i < a.cols(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      double d = 0.0;
      for (Eigen::Index r = 0; r < a.rows(); ++r) d += (a(r, i) - b(r, j)) * (a(r, i) - b(r, j));
      k(i, j) = std::exp(-d / (2.0 * sigma * sigma));
    }
  return k;
}

// Explicit finite feature map of the reference-set construction:
//   phi(x) = Lambda_r^(-1/2) U_rᵀ kc(x),
//   kc(x)  = J (k_R(x) - K_RR 1/R),  J = I - 11ᵀ/R,
// where U_r, Lambda_r are the retained eigenpairs of J K_RR J.
struct GrkFeatureMap {
  Mat reference;
  double sigma;
  Mat k_rr;
  Mat j;
  Mat projection;  // Lambda_r^(-1/2) U_rᵀ

  GrkFeatureMap(const grkneg::Matrix& ref, double sig, double rel_tol = 1e-10)
      : reference(to_eigen(ref)), sigma(sig) {
    const Eigen::Index r = reference.cols();
    k_rr = rbf(reference, reference, sigma);
    j = Mat::Identity(r, r) - Mat::Constant(r, r, 1.0 / static_cast<double>(r));
    const Mat centered = j * k_rr * j;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (centered + centered.transpose()));
    const double lmax = es.eigenvalues().maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < r; ++i)
      if (lmax > 0.0 && es.eigenvalues()(i) > rel_tol * lmax) keep.push_back(i);
    projection = Mat::Zero(static_cast<Eigen::Index>(keep.size()), r);
    for (std::size_t t = 0; t < keep.size(); ++t) {
      const auto i = keep[t];
      projection.row(static_cast<Eigen::Index>(t)) =
          es.eigenvectors().col(i).transpose() / std::sqrt(es.eigenvalues()(i));
    }
  }

  std::size_t rank() const { return static_cast<std::size_t>(projection.rows()); }

  Mat centered_cross(const grkneg::Matrix& x) const {
    const Mat kx = rbf(reference, to_eigen(x), sigma);
    const Vec row_means = k_rr.rowwise().mean();
    return j * (kx - row_means * Eigen::RowVectorXd::Ones(kx.cols()));
  }

  Mat features(const grkneg::Matrix& x) const { return projection * centered_cross(x); }

  Mat kernel(const grkneg::Matrix& a, const grkneg::Matrix& b) const {
    return features(a).transpose() * features(b);
  }
};

// Dual problem min 0.5 aᵀQa + pᵀa, Q_ij = y_i y_j K_ij, 0 <= a_i <= c, yᵀa = b.
struct Dual {
  Mat q;
  Vec p;
  Vec y;
  double c;
  double b;

  double objective(const Vec& a) const { return 0.5 * a.dot(q * a) + p.dot(a); }
};

inline Dual oneclass_dual(const grkneg::Matrix& kernel, double nu) {
  const auto n = static_cast<Eigen::Index>(kernel.rows());
  return {to_eigen(kernel), Vec::Zero(n), Vec::Ones(n), 1.0 / (nu * static_cast<double>(n)), 1.0};
}

inline Dual binary_dual(const grkneg::Matrix& kernel, const std::vector<int>& labels, double c) {
  const auto n = static_cast<Eigen::Index>(kernel.rows());
  Vec y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = labels[static_cast<std::size_t>(i)];
  return {y.asDiagonal() * to_eigen(kernel) * y.asDiagonal(), Vec::Constant(n, -1.0), y, c, 0.0};
}

// Euclidean projection onto {0 <= a <= c, yᵀa = b} for y in {±1}: a(l) = clip(v - l y)
// with l found by bisection on the monotone constraint residual.
inline Vec project(const Vec& v, const Dual& d) {
  auto residual = [&](double l) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += d.y(i) * std::clamp(v(i) - l * d.y(i), 0.0, d.c);
    return s - d.b;
  };
  double lo = -(v.cwiseAbs().maxCoeff() + d.c + 1.0);
  double hi = -lo;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) > 0.0 ? lo : hi) = mid;
  }
  const double l = 0.5 * (lo + hi);
  Vec a(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) a(i) = std::clamp(v(i) - l * d.y(i), 0.0, d.c);
  return a;
}

// FISTA with gradient-based adaptive restart.
inline Vec projected_gradient(const Dual& d, int max_iter = 500000, double tol = 1e-14) {
  const auto n = d.q.rows();
  Eigen::SelfAdjointEigenSolver<Mat> es(d.q, Eigen::EigenvaluesOnly);
  const double lip = std::max(es.eigenvalues().maxCoeff(), 1e-12);
  Vec x = project(Vec::Constant(n, 0.0), d);
  Vec z = x;
  double t = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    const Vec next = project(z - (d.q * z + d.p) / lip, d);
    const double step = (next - x).cwiseAbs().maxCoeff();
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if ((z - next).dot(next - x) > 0.0) {
      z = next;
      t = 1.0;
    } else {
      z = next + ((t - 1.0) / t_next) * (next - x);
      t = t_next;
    }
    x = next;
    if (step < tol) break;
  }
  return x;
}

// Largest violation of the first-order conditions: max over I_up of -y G minus min over I_low.
inline double kkt_gap(const Dual& d, const Vec& a) {
  const Vec g = d.q * a + d.p;
  double up = -std::numeric_limits<double>::infinity();
  double low = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double v = -d.y(i) * g(i);
    const bool can_up = d.y(i) > 0 ? a(i) < d.c : a(i) > 0.0;
    const bool can_low = d.y(i) > 0 ? a(i) > 0.0 : a(i) < d.c;
    if (can_up) up = std::max(up, v);
    if (can_low) low = std::min(low, v);
  }
  if (!std::isfinite(up) || !std::isfinite(low)) return 0.0;
  return up - low;
}

inline Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

}  // namespace oracle
