#pragma once

// Methods compared in the study and the kernel/solver plumbing that turns
// (method, training data, hyperparameters) into decision values.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "grkneg/grk.hpp"
#include "grkneg/matrix.hpp"
#include "grkneg/rng.hpp"
#include "grkneg/svm.hpp"

namespace grkneg {

struct Method {
  enum class Kind { OcsvmRbf, OcsvmGrk, BinarySvm };
  Kind kind = Kind::OcsvmRbf;
  int variant = 0;  // 1..9 for OcsvmGrk

  static Method ocsvm() { return {Kind::OcsvmRbf, 0}; }
  static Method svm() { return {Kind::BinarySvm, 0}; }
  static Method grk(int v) { return {Kind::OcsvmGrk, variant_number(strategy_from_number(v))}; }

  static Method parse(std::string_view s) {
    if (s == "ocsvm") return ocsvm();
    if (s == "svm" || s == "binary-svm") return svm();
    if (s.size() == 4 && s.substr(0, 3) == "grk" && s[3] >= '1' && s[3] <= '9') return grk(s[3] - '0');
    throw std::invalid_argument("unknown method '" + std::string(s) + "' (expected ocsvm, grk1..grk9 or svm)");
  }

  std::string str() const {
    switch (kind) {
      case Kind::OcsvmRbf: return "ocsvm";
      case Kind::BinarySvm: return "svm";
      case Kind::OcsvmGrk: return "grk" + std::to_string(variant);
    }
    return "?";
  }

  bool one_class() const { return kind != Kind::BinarySvm; }
  ReferenceStrategy strategy() const { return strategy_from_number(variant); }
  friend bool operator==(const Method&, const Method&) = default;
};

// s scales the kernel width; param is nu (one-class) or C (binary).
struct Hyperparams {
  double s = 1.0;
  double param = 0.1;
  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

// sqrt(s * mean squared distance over ordered pairs i != j of training columns).
inline double sigma_from_s(const Matrix& train, double s) {
  const std::size_t n = train.cols();
  if (n < 2) throw std::invalid_argument("sigma_from_s: need at least two training samples");
  if (!(s > 0.0)) throw std::invalid_argument("sigma_from_s: s must be positive");
  const Matrix d = pairwise_sq_dist(train, train);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) sum += d(i, j);
  const double d_aver = 2.0 * sum / static_cast<double>(n * (n - 1));
  if (!(d_aver > 0.0)) throw std::invalid_argument("sigma_from_s: training samples are identical");
  return std::sqrt(s * d_aver);
}

// Everything needed to produce train and test kernels for one (method, sigma).
struct KernelModel {
  Method method;
  double sigma = 1.0;
  Matrix samples;           // training columns the kernel is evaluated against (RBF methods)
  std::vector<int> labels;  // binary SVM only
  std::optional<GrkModel> grk;
  Matrix train_kernel;

  Matrix test_kernel(const Matrix& test) const {
    if (grk) return grk_test(*grk, test);
    return rbf_kernel(samples, test, sigma);
  }
};

// Negatives enter one-class methods only through the GRK reference set.
inline KernelModel build_kernel(const Method& method, const Matrix& pos, const Matrix& neg, double sigma,
                                const Matrix* reference = nullptr) {
  KernelModel km;
  km.method = method;
  km.sigma = sigma;
  switch (method.kind) {
    case Method::Kind::OcsvmRbf:
      km.samples = pos;
      km.train_kernel = rbf_kernel(pos, pos, sigma);
      break;
    case Method::Kind::BinarySvm:
      km.samples = hconcat(pos, neg);
      km.labels.assign(pos.cols(), 1);
      km.labels.insert(km.labels.end(), neg.cols(), -1);
      km.train_kernel = rbf_kernel(km.samples, km.samples, sigma);
      break;
    case Method::Kind::OcsvmGrk:
      if (reference == nullptr) throw std::invalid_argument("build_kernel: GRK needs a reference set");
      km.grk = grk_train(pos, *reference, sigma);
      km.train_kernel = km.grk->train_kernel;
      break;
  }
  return km;
}

inline SvmModel solve(const KernelModel& km, double param, const SolverConfig& cfg = {}) {
  if (km.method.one_class()) return train_oneclass(km.train_kernel, param, cfg);
  return train_binary(km.train_kernel, km.labels, param, cfg);
}

struct FittedClassifier {
  KernelModel kernel;
  Hyperparams hyper;
  SvmModel svm;

  std::vector<double> decision_values(const Matrix& test) const { return decide(svm, kernel.test_kernel(test)); }
};

inline FittedClassifier fit(const Method& method, const Matrix& pos, const Matrix& neg, const Hyperparams& hyper,
                            std::uint64_t reference_seed, const SolverConfig& cfg = {}) {
  const double sigma = sigma_from_s(pos, hyper.s);
  std::optional<Matrix> reference;
  if (method.kind == Method::Kind::OcsvmGrk) {
    Rng rng(reference_seed);
    reference = build_reference_set(method.strategy(), pos, neg, rng);
  }
  FittedClassifier f;
  f.kernel = build_kernel(method, pos, neg, sigma, reference ? &*reference : nullptr);
  f.hyper = hyper;
  f.svm = solve(f.kernel, hyper.param, cfg);
  return f;
}

}  // namespace grkneg
