#pragma once

// Self-describing model files: everything prediction needs (standardizer,
// kernel artefacts, multipliers, offset) plus the provenance that produced it.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "grkneg/data.hpp"
#include "grkneg/pipeline.hpp"

namespace grkneg {

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kModelFormatName = "grkneg-model";

struct ModelProvenance {
  std::string dataset;
  std::string task;
  std::string target_class;
  std::string budget;
  std::size_t repeat = 0;
  std::uint64_t global_seed = 0;
  std::uint64_t split_seed = 0;
  std::uint64_t reference_seed = 0;
  bool auto_cv = false;
};

struct SavedModel {
  ModelProvenance provenance;
  Standardizer standardizer;
  FittedClassifier classifier;

  // Decision values for raw (unstandardized) D×Y data.
  std::vector<double> decision_values(const Matrix& raw) const {
    return classifier.decision_values(standardize(raw, standardizer));
  }
};

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                j.at("data").get<std::vector<double>>());
}

}  // namespace detail

inline nlohmann::json to_json(const SavedModel& m) {
  using detail::matrix_to_json;
  const auto& c = m.classifier;
  const auto& p = m.provenance;
  nlohmann::json j;
  j["format"] = kModelFormatName;
  j["version"] = kModelFormatVersion;
  j["method"] = c.kernel.method.str();
  j["provenance"] = {{"dataset", p.dataset},       {"task", p.task},
                     {"target_class", p.target_class}, {"budget", p.budget},
                     {"repeat", p.repeat},         {"global_seed", p.global_seed},
                     {"split_seed", p.split_seed}, {"reference_seed", p.reference_seed},
                     {"auto_cv", p.auto_cv}};
  j["hyperparams"] = {{"s", c.hyper.s}, {"param", c.hyper.param}};
  j["standardizer"] = {{"mean", m.standardizer.mean}, {"std", m.standardizer.std}};
  nlohmann::json k;
  k["sigma"] = c.kernel.sigma;
  if (c.kernel.grk) {
    const auto& g = *c.kernel.grk;
    k["reference_set"] = matrix_to_json(g.reference_set);
    k["k_rr"] = matrix_to_json(g.k_rr);
    k["k_rr_centered"] = matrix_to_json(g.k_rr_centered);
    k["k_rr_pinv"] = matrix_to_json(g.k_rr_pinv);
    k["rank"] = g.rank;
    k["k_rp_centered"] = matrix_to_json(g.k_rp_centered);
  } else {
    k["samples"] = matrix_to_json(c.kernel.samples);
  }
  j["kernel"] = std::move(k);
  const auto& s = c.svm;
  j["svm"] = {{"kind", s.kind == SvmKind::OneClassNu ? "one-class-nu" : "binary-c"},
              {"alphas", s.alphas},
              {"labels", s.labels},
              {"rho", s.rho},
              {"upper_bound", s.upper_bound},
              {"iterations", s.iterations},
              {"objective", s.objective},
              {"kkt_gap", s.kkt_gap}};
  return j;
}

inline SavedModel from_json(const nlohmann::json& j) {
  using detail::matrix_from_json;
  if (j.value("format", std::string()) != kModelFormatName) throw DataError("model file: unrecognized format");
  if (j.at("version").get<int>() != kModelFormatVersion) {
    throw DataError("model file: unsupported version " + std::to_string(j.at("version").get<int>()));
  }
  SavedModel m;
  const auto& p = j.at("provenance");
  m.provenance = {p.at("dataset").get<std::string>(),      p.at("task").get<std::string>(),
                  p.at("target_class").get<std::string>(), p.at("budget").get<std::string>(),
                  p.at("repeat").get<std::size_t>(),       p.at("global_seed").get<std::uint64_t>(),
                  p.at("split_seed").get<std::uint64_t>(), p.at("reference_seed").get<std::uint64_t>(),
                  p.at("auto_cv").get<bool>()};
  m.standardizer.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
  m.standardizer.std = j.at("standardizer").at("std").get<std::vector<double>>();

  auto& c = m.classifier;
  c.hyper = {j.at("hyperparams").at("s").get<double>(), j.at("hyperparams").at("param").get<double>()};
  c.kernel.method = Method::parse(j.at("method").get<std::string>());
  const auto& k = j.at("kernel");
  c.kernel.sigma = k.at("sigma").get<double>();
  if (c.kernel.method.kind == Method::Kind::OcsvmGrk) {
    GrkModel g;
    g.reference_set = matrix_from_json(k.at("reference_set"));
    g.base_sigma = c.kernel.sigma;
    g.k_rr = matrix_from_json(k.at("k_rr"));
    g.k_rr_centered = matrix_from_json(k.at("k_rr_centered"));
    g.k_rr_pinv = matrix_from_json(k.at("k_rr_pinv"));
    g.rank = k.at("rank").get<std::size_t>();
    g.k_rp_centered = matrix_from_json(k.at("k_rp_centered"));
    c.kernel.grk = std::move(g);
  } else {
    c.kernel.samples = matrix_from_json(k.at("samples"));
  }
  const auto& s = j.at("svm");
  c.svm.kind = s.at("kind").get<std::string>() == "binary-c" ? SvmKind::BinaryC : SvmKind::OneClassNu;
  c.svm.alphas = s.at("alphas").get<std::vector<double>>();
  c.svm.labels = s.at("labels").get<std::vector<int>>();
  c.svm.rho = s.at("rho").get<double>();
  c.svm.upper_bound = s.at("upper_bound").get<double>();
  c.svm.iterations = s.at("iterations").get<std::uint64_t>();
  c.svm.objective = s.at("objective").get<double>();
  c.svm.kkt_gap = s.at("kkt_gap").get<double>();
  c.kernel.labels = c.svm.labels;
  return m;
}

inline void save_model(const std::filesystem::path& path, const SavedModel& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(m).dump(1) << '\n';
}

inline SavedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace grkneg
