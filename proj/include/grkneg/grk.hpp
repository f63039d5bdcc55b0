#pragma once

// Generalized reference kernel with negative samples.
//
// Training positives P are represented through their centered base-kernel
// responses to a reference set R; the resulting P×P kernel is
//   K_PP = Kc_RPᵀ · Kc_RR⁺ · Kc_RP
// and test points Y get K_PY = Kc_RPᵀ · Kc_RR⁺ · Kc_RY, where every cross
// kernel is centered with the statistics of the reference set.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "grkneg/eigen.hpp"
#include "grkneg/matrix.hpp"
#include "grkneg/rng.hpp"

namespace grkneg {

// Reference-vector recipes. P and N are the positive and negative training counts.
enum class ReferenceStrategy {
  V1 = 1,  // P positive training
  V2,      // P positive + N negative training
  V3,      // N negative training
  V4,      // P positive-generated + N negative-generated
  V5,      // P+N negative-generated
  V6,      // P non-positive-generated + N negative-generated
  V7,      // N negative training + P negative-generated (proposed)
  V8,      // N negative training + 2P negative-generated
  V9,      // N negative training + max(1, floor(P/2)) negative-generated
};

inline int variant_number(ReferenceStrategy s) { return static_cast<int>(s); }

inline ReferenceStrategy strategy_from_number(int v) {
  if (v < 1 || v > 9) throw std::invalid_argument("reference strategy must be 1..9, got " + std::to_string(v));
  return static_cast<ReferenceStrategy>(v);
}

inline bool uses_negatives(ReferenceStrategy s) { return s != ReferenceStrategy::V1; }

// Number of reference vectors the recipe yields.
inline std::size_t reference_count(ReferenceStrategy s, std::size_t p, std::size_t n) {
  switch (s) {
    case ReferenceStrategy::V1: return p;
    case ReferenceStrategy::V2: return p + n;
    case ReferenceStrategy::V3: return n;
    case ReferenceStrategy::V4:
    case ReferenceStrategy::V5:
    case ReferenceStrategy::V6:
    case ReferenceStrategy::V7: return p + n;
    case ReferenceStrategy::V8: return 2 * p + n;
    case ReferenceStrategy::V9: return std::max<std::size_t>(1, p / 2) + n;
  }
  return 0;
}

struct NegativeDistribution {
  std::vector<double> mean;
  std::vector<double> std;  // strictly positive
};

// Per-dimension mean and sample standard deviation (N-1 denominator).
// A single negative, or a zero-variance dimension, gets std 1.
inline NegativeDistribution sample_negative_distribution(const Matrix& neg) {
  if (neg.cols() == 0 || neg.rows() == 0) {
    throw std::invalid_argument("sample_negative_distribution: no negative samples");
  }
  const std::size_t d = neg.rows();
  const std::size_t n = neg.cols();
  NegativeDistribution dist{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
  for (std::size_t i = 0; i < d; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += neg(i, j);
    const double mu = s / static_cast<double>(n);
    dist.mean[i] = mu;
    if (n < 2) continue;
    double ss = 0.0;
    for (std::size_t j = 0; j < n; ++j) ss += (neg(i, j) - mu) * (neg(i, j) - mu);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    dist.std[i] = sd > 0.0 ? sd : 1.0;
  }
  return dist;
}

// Columns drawn from N(mean, diag(std^2)); column-major draw order.
inline Matrix generate_samples(const NegativeDistribution& dist, std::size_t count, Rng& rng) {
  if (count == 0) throw std::invalid_argument("generate_samples: count must be >= 1");
  if (dist.mean.size() != dist.std.size()) throw DimensionError("generate_samples: mean/std length mismatch");
  const std::size_t d = dist.mean.size();
  Matrix out(d, count);
  for (std::size_t j = 0; j < count; ++j)
    for (std::size_t i = 0; i < d; ++i) out(i, j) = dist.mean[i] + dist.std[i] * rng.normal();
  return out;
}

// z -> z + 0.5 sign(z), sign(0) = +1.
inline double push_from_origin(double z) { return z >= 0.0 ? z + 0.5 : z - 0.5; }

// Standard-normal draws pushed away from the origin; |entry| >= 0.5.
inline Matrix generate_nonpositive(std::size_t count, std::size_t dims, Rng& rng) {
  if (count == 0) throw std::invalid_argument("generate_nonpositive: count must be >= 1");
  Matrix out(dims, count);
  for (std::size_t j = 0; j < count; ++j)
    for (std::size_t i = 0; i < dims; ++i) out(i, j) = push_from_origin(rng.normal());
  return out;
}

// Training-derived columns first, generated columns second.
inline Matrix build_reference_set(ReferenceStrategy strategy, const Matrix& pos, const Matrix& neg, Rng& rng) {
  if (pos.cols() == 0) throw std::invalid_argument("build_reference_set: no positive samples");
  if (uses_negatives(strategy) && neg.cols() == 0) {
    throw std::invalid_argument("build_reference_set: variant " + std::to_string(variant_number(strategy)) +
                                " requires negative samples");
  }
  if (!neg.empty() && neg.rows() != pos.rows()) throw DimensionError("build_reference_set: dimension mismatch");
  const std::size_t d = pos.rows();
  const std::size_t p = pos.cols();
  const std::size_t n = neg.cols();

  auto negative_generated = [&](std::size_t count) {
    return generate_samples(sample_negative_distribution(neg), count, rng);
  };
  auto positive_generated = [&](std::size_t count) {
    return generate_samples({std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)}, count, rng);
  };

  switch (strategy) {
    case ReferenceStrategy::V1: return pos;
    case ReferenceStrategy::V2: return hconcat(pos, neg);
    case ReferenceStrategy::V3: return neg;
    case ReferenceStrategy::V4: {
      Matrix gp = positive_generated(p);
      return hconcat(gp, negative_generated(n));
    }
    case ReferenceStrategy::V5: return negative_generated(p + n);
    case ReferenceStrategy::V6: {
      Matrix np = generate_nonpositive(p, d, rng);
      return hconcat(np, negative_generated(n));
    }
    case ReferenceStrategy::V7: return hconcat(neg, negative_generated(p));
    case ReferenceStrategy::V8: return hconcat(neg, negative_generated(2 * p));
    case ReferenceStrategy::V9: return hconcat(neg, negative_generated(std::max<std::size_t>(1, p / 2)));
  }
  throw std::invalid_argument("build_reference_set: unknown strategy");
}

struct GrkModel {
  Matrix reference_set;   // D×R
  double base_sigma = 1.0;
  Matrix k_rr;            // uncentered R×R, kept for test-time centering
  Matrix k_rr_centered;   // R×R
  Matrix k_rr_pinv;       // R×R
  std::size_t rank = 0;
  Matrix k_rp_centered;   // R×P
  Matrix train_kernel;    // P×P
};

inline GrkModel grk_train(const Matrix& pos, const Matrix& reference, double sigma) {
  if (pos.rows() != reference.rows()) {
    throw DimensionError("grk_train: positives have dimension " + std::to_string(pos.rows()) +
                         ", reference set " + std::to_string(reference.rows()));
  }
  if (reference.cols() == 0 || pos.cols() == 0) throw std::invalid_argument("grk_train: empty input");
  GrkModel m;
  m.reference_set = reference;
  m.base_sigma = sigma;
  m.k_rr = rbf_kernel(reference, reference, sigma);
  m.k_rr_centered = center_square_kernel(m.k_rr);
  const EigenDecomposition eig = sym_eigen(m.k_rr_centered);
  m.rank = eig.rank;
  m.k_rr_pinv = pseudoinverse(eig);
  m.k_rp_centered = center_cross_kernel(m.k_rr, rbf_kernel(reference, pos, sigma));
  m.train_kernel = symmetrize(transpose_times(m.k_rp_centered, m.k_rr_pinv * m.k_rp_centered));
  return m;
}

// P×Y kernel between the training positives and the columns of `test`.
inline Matrix grk_test(const GrkModel& model, const Matrix& test) {
  if (test.rows() != model.reference_set.rows()) {
    throw DimensionError("grk_test: test data has dimension " + std::to_string(test.rows()) + ", model expects " +
                         std::to_string(model.reference_set.rows()));
  }
  const Matrix k_ry = center_cross_kernel(model.k_rr, rbf_kernel(model.reference_set, test, model.base_sigma));
  return transpose_times(model.k_rp_centered, model.k_rr_pinv * k_ry);
}

}  // namespace grkneg
