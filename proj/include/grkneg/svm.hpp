#pragma once

// SMO solvers on precomputed kernels: the nu one-class SVM and the binary
// C-SVC. Both are instances of
//
//   min 0.5 aᵀQa + pᵀa   s.t.  yᵀa = delta,  0 <= a_i <= C_i
//
// with Q_ij = y_i y_j K_ij, solved by maximal-violating-pair SMO.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "grkneg/eigen.hpp"
#include "grkneg/matrix.hpp"

namespace grkneg {

enum class SvmKind { OneClassNu, BinaryC };

struct SolverConfig {
  double kkt_tol = 1e-4;
  std::uint64_t max_iter = 10'000'000;
  bool record_objective = false;
};

struct SvmModel {
  SvmKind kind = SvmKind::OneClassNu;
  std::vector<double> alphas;
  std::vector<int> labels;  // +1 for every sample in the one-class case
  double rho = 0.0;
  double upper_bound = 0.0;  // box constraint C_i (shared by all samples)
  std::uint64_t iterations = 0;
  double objective = 0.0;
  double kkt_gap = 0.0;
  std::vector<double> objective_trace;  // filled when SolverConfig::record_objective
};

namespace detail {

inline constexpr double kTau = 1e-12;

struct SmoProblem {
  const Matrix& kernel;
  std::vector<int> y;
  std::vector<double> p;
  double bound;
};

inline void run_smo(const SmoProblem& prob, std::vector<double>& alpha, const SolverConfig& cfg, SvmModel& out) {
  const std::size_t n = alpha.size();
  const Matrix& k = prob.kernel;
  const auto& y = prob.y;
  const double c = prob.bound;
  auto q = [&](std::size_t i, std::size_t j) { return static_cast<double>(y[i] * y[j]) * k(i, j); };

  std::vector<double> grad(prob.p);
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] == 0.0) continue;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, i) * alpha[i];
  }

  auto objective = [&] {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) f += alpha[i] * (grad[i] + prob.p[i]);
    return 0.5 * f;
  };
  auto in_up = [&](std::size_t t) { return y[t] > 0 ? alpha[t] < c : alpha[t] > 0.0; };
  auto in_low = [&](std::size_t t) { return y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < c; };

  if (cfg.record_objective) out.objective_trace.push_back(objective());

  std::uint64_t iter = 0;
  double gap = 0.0;
  for (;;) {
    // Maximal violating pair: i maximizes -y G over I_up, j minimizes it over I_low.
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -static_cast<double>(y[t]) * grad[t];
      if (in_up(t) && v > gmax) {
        gmax = v;
        i = t;
      }
      if (in_low(t) && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    gap = (i == n || j == n) ? 0.0 : gmax - gmin;
    if (gap <= cfg.kkt_tol) break;
    if (iter >= cfg.max_iter) {
      throw ConvergenceError("SMO: no convergence within " + std::to_string(cfg.max_iter) +
                             " iterations (gap " + std::to_string(gap) + ")");
    }
    ++iter;

    const double old_i = alpha[i];
    const double old_j = alpha[j];
    const double qij = q(i, j);
    if (y[i] != y[j]) {
      double quad = k(i, i) + k(j, j) + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = k(i, i) + k(j, j) - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, i) * di + q(t, j) * dj;
    if (cfg.record_objective) out.objective_trace.push_back(objective());
  }

  // Offset: mean of y G over free variables, else midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = static_cast<double>(y[t]) * grad[t];
    if (alpha[t] >= c) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  // With every variable at one bound side (e.g. nu = 1), only one end is finite.
  if (n_free > 0) out.rho = sum_free / static_cast<double>(n_free);
  else if (std::isfinite(ub) && std::isfinite(lb)) out.rho = 0.5 * (ub + lb);
  else if (std::isfinite(lb)) out.rho = lb;
  else if (std::isfinite(ub)) out.rho = ub;
  else out.rho = 0.0;
  out.alphas = alpha;
  out.labels = y;
  out.upper_bound = c;
  out.iterations = iter;
  out.objective = objective();
  out.kkt_gap = gap;
}

inline void check_kernel(const Matrix& kernel, std::size_t n, const char* who) {
  if (!kernel.is_square() || kernel.rows() != n) {
    throw DimensionError(std::string(who) + ": kernel must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (!is_symmetric(kernel, 1e-8 * std::max(1.0, kernel.max_abs()))) {
    throw std::invalid_argument(std::string(who) + ": kernel is not symmetric");
  }
  require_finite(kernel, who);
}

}  // namespace detail

// nu one-class SVM with normalized multipliers: 0 <= a_i <= 1/(nu P), sum a = 1.
inline SvmModel train_oneclass(const Matrix& kernel, double nu, const SolverConfig& cfg = {}) {
  const std::size_t p = kernel.rows();
  detail::check_kernel(kernel, p, "train_oneclass");
  if (p == 0) throw std::invalid_argument("train_oneclass: empty kernel");
  if (!(nu > 0.0 && nu <= 1.0) || nu * static_cast<double>(p) < 1.0 - 1e-12) {
    throw std::invalid_argument("train_oneclass: infeasible nu " + std::to_string(nu) + " for " +
                                std::to_string(p) + " samples (need 0 < nu <= 1 and nu*P >= 1)");
  }
  const double bound = 1.0 / (nu * static_cast<double>(p));
  // The first floor(nu P) multipliers at the bound, the remainder on the next one.
  std::vector<double> alpha(p, 0.0);
  const auto full = static_cast<std::size_t>(std::floor(nu * static_cast<double>(p) + 1e-12));
  double left = 1.0;
  for (std::size_t i = 0; i < p && left > 0.0; ++i) {
    alpha[i] = i < full ? bound : left;
    left -= alpha[i];
    if (left < 1e-15) left = 0.0;
  }
  SvmModel m;
  m.kind = SvmKind::OneClassNu;
  detail::run_smo({kernel, std::vector<int>(p, 1), std::vector<double>(p, 0.0), bound}, alpha, cfg, m);
  return m;
}

inline SvmModel train_binary(const Matrix& kernel, const std::vector<int>& labels, double c,
                             const SolverConfig& cfg = {}) {
  const std::size_t n = labels.size();
  detail::check_kernel(kernel, n, "train_binary");
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("train_binary: C must be positive");
  bool has_pos = false, has_neg = false;
  for (int l : labels) {
    if (l == 1) has_pos = true;
    else if (l == -1) has_neg = true;
    else throw std::invalid_argument("train_binary: labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) throw std::invalid_argument("train_binary: both classes must be present");
  std::vector<double> alpha(n, 0.0);
  SvmModel m;
  m.kind = SvmKind::BinaryC;
  detail::run_smo({kernel, labels, std::vector<double>(n, -1.0), c}, alpha, cfg, m);
  return m;
}

// 0.5 aᵀQa + pᵀa for the model's own problem.
inline double dual_objective(const Matrix& kernel, const SvmModel& m) {
  const std::size_t n = m.alphas.size();
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      quad += m.alphas[i] * m.alphas[j] * m.labels[i] * m.labels[j] * kernel(i, j);
    if (m.kind == SvmKind::BinaryC) lin -= m.alphas[i];
  }
  return 0.5 * quad + lin;
}

// value_j = sum_i a_i y_i K(i, j) - rho for a train×Y test kernel.
inline std::vector<double> decide(const SvmModel& m, const Matrix& test_kernel) {
  if (test_kernel.rows() != m.alphas.size()) {
    throw DimensionError("decide: test kernel has " + std::to_string(test_kernel.rows()) + " rows, model has " +
                         std::to_string(m.alphas.size()) + " training samples");
  }
  std::vector<double> values(test_kernel.cols(), -m.rho);
  for (std::size_t i = 0; i < m.alphas.size(); ++i) {
    const double w = m.alphas[i] * m.labels[i];
    if (w == 0.0) continue;
    auto row = test_kernel.row(i);
    for (std::size_t j = 0; j < values.size(); ++j) values[j] += w * row[j];
  }
  return values;
}

// Ties at exactly zero count as positive.
inline bool is_positive(double decision_value) { return decision_value >= 0.0; }

}  // namespace grkneg
