#pragma once

// Dataset ingestion, one-class task construction and the seeded
// stratified 70/30 split with nested negative budgets.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "grkneg/matrix.hpp"
#include "grkneg/rng.hpp"

namespace grkneg {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dataset {
  std::string name;
  Matrix features;                       // D×N_tot, one column per sample
  std::vector<int> labels;               // dense class indices
  std::vector<std::string> class_names;  // raw label per class index

  std::size_t dims() const { return features.rows(); }
  std::size_t size() const { return features.cols(); }
  std::size_t class_count() const { return class_names.size(); }

  std::size_t class_size(int c) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), c));
  }

  int class_index(std::string_view raw) const {
    for (std::size_t i = 0; i < class_names.size(); ++i)
      if (class_names[i] == raw) return static_cast<int>(i);
    throw DataError("dataset " + name + ": unknown class '" + std::string(raw) + "'");
  }
};

struct CsvSchema {
  char delimiter = ',';  // ' ' splits on any run of whitespace
  int label_column = -1;  // negative counts from the end; ignored when has_labels is false
  bool has_labels = true;
  bool header = false;
  std::vector<int> drop_columns;     // feature columns removed after parsing, by original position
  std::vector<std::string> classes;  // fixes class order; empty means order of first appearance
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  if (delim == ' ') {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j > i) out.push_back(line.substr(i, j - i));
      i = j;
    }
    return out;
  }
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace detail

inline Dataset parse_csv(std::istream& in, const CsvSchema& schema, std::string name) {
  Dataset ds;
  ds.name = std::move(name);
  ds.class_names = schema.classes;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool header_pending = schema.header;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto fields = detail::split_fields(view, schema.delimiter);
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw DataError(ds.name + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) +
                      " fields, found " + std::to_string(fields.size()));
    }
    std::size_t label_pos = width;
    if (schema.has_labels) {
      const int lc = schema.label_column < 0 ? static_cast<int>(width) + schema.label_column : schema.label_column;
      if (lc < 0 || lc >= static_cast<int>(width)) {
        throw DataError(ds.name + ":" + std::to_string(line_no) + ": label column out of range");
      }
      label_pos = static_cast<std::size_t>(lc);
    }
    std::vector<double> row;
    row.reserve(width);
    for (std::size_t f = 0; f < width; ++f) {
      if (f == label_pos) continue;
      if (fields[f].empty() || fields[f] == "?") {
        throw DataError(ds.name + ":" + std::to_string(line_no) + ": missing value in column " + std::to_string(f + 1));
      }
      const auto v = detail::parse_double(fields[f]);
      if (!v) {
        throw DataError(ds.name + ":" + std::to_string(line_no) + ": non-numeric feature '" + std::string(fields[f]) +
                        "' in column " + std::to_string(f + 1));
      }
      row.push_back(*v);
    }
    if (schema.has_labels) {
      const std::string raw(fields[label_pos]);
      auto it = std::find(ds.class_names.begin(), ds.class_names.end(), raw);
      if (it == ds.class_names.end()) {
        if (!schema.classes.empty()) {
          throw DataError(ds.name + ":" + std::to_string(line_no) + ": unknown label '" + raw + "'");
        }
        ds.class_names.push_back(raw);
        it = ds.class_names.end() - 1;
      }
      ds.labels.push_back(static_cast<int>(it - ds.class_names.begin()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(ds.name + ": no data rows");

  // Feature positions refer to the original columns; map them past the label.
  std::vector<std::size_t> keep;
  const std::size_t n_feat = rows.front().size();
  const int lc = schema.has_labels
                     ? (schema.label_column < 0 ? static_cast<int>(width) + schema.label_column : schema.label_column)
                     : -1;
  for (std::size_t f = 0, orig = 0; f < n_feat; ++f, ++orig) {
    if (static_cast<int>(orig) == lc) ++orig;
    if (std::find(schema.drop_columns.begin(), schema.drop_columns.end(), static_cast<int>(orig)) ==
        schema.drop_columns.end()) {
      keep.push_back(f);
    }
  }
  if (keep.empty()) throw DataError(ds.name + ": no feature columns left");

  ds.features = Matrix(keep.size(), rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t i = 0; i < keep.size(); ++i) ds.features(i, j) = rows[j][keep[i]];
  return ds;
}

inline Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema, std::string name = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_csv(in, schema, name.empty() ? path.stem().string() : std::move(name));
}

// Bundled data manifest (data/manifest.json).

struct DatasetEntry {
  std::string name;
  std::string file;
  CsvSchema schema;
  std::vector<std::string> display_names;
  bool surrogate = false;
  std::string source;
};

struct TaskSpec {
  std::string id;
  std::string dataset;
  std::string target;  // raw label of the positive class
};

struct DataManifest {
  std::filesystem::path root;
  std::vector<DatasetEntry> datasets;
  std::vector<TaskSpec> tasks;

  const DatasetEntry& dataset(std::string_view name) const {
    for (const auto& d : datasets)
      if (d.name == name) return d;
    throw DataError("manifest: unknown dataset '" + std::string(name) + "'");
  }

  const TaskSpec& task(std::string_view id) const {
    for (const auto& t : tasks)
      if (t.id == id) return t;
    throw DataError("manifest: unknown task '" + std::string(id) + "'");
  }
};

inline DataManifest load_manifest(const std::filesystem::path& dir) {
  const auto file = dir / "manifest.json";
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(file.string() + ": " + e.what());
  }
  DataManifest m;
  m.root = dir;
  for (const auto& d : j.at("datasets")) {
    DatasetEntry e;
    e.name = d.at("name").get<std::string>();
    e.file = d.at("file").get<std::string>();
    const auto delim = d.value("delimiter", std::string(","));
    e.schema.delimiter = delim.empty() ? ' ' : delim.front();
    e.schema.label_column = d.value("label_column", -1);
    e.schema.header = d.value("header", false);
    e.schema.drop_columns = d.value("drop_columns", std::vector<int>{});
    e.schema.classes = d.at("classes").get<std::vector<std::string>>();
    e.display_names = d.value("class_names", e.schema.classes);
    e.surrogate = d.value("surrogate", false);
    e.source = d.value("source", std::string());
    m.datasets.push_back(std::move(e));
  }
  for (const auto& t : j.at("tasks")) {
    m.tasks.push_back({t.at("id").get<std::string>(), t.at("dataset").get<std::string>(),
                       t.at("target").get<std::string>()});
  }
  return m;
}

inline Dataset load_bundled(const DataManifest& m, std::string_view name) {
  const auto& e = m.dataset(name);
  return load_csv(m.root / e.file, e.schema, e.name);
}

// Negative budget: a fixed count or every available negative.
struct NegBudget {
  std::optional<std::size_t> limit;

  static NegBudget all() { return {}; }
  static NegBudget of(std::size_t n) { return {n}; }

  static NegBudget parse(std::string_view s) {
    if (s == "all" || s == "All") return all();
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v == 0) {
      throw std::invalid_argument("negative budget must be a positive count or 'all', got '" + std::string(s) + "'");
    }
    return of(v);
  }

  std::size_t apply(std::size_t available) const { return limit ? std::min(*limit, available) : available; }
  std::string str() const { return limit ? std::to_string(*limit) : "all"; }
  friend bool operator==(const NegBudget&, const NegBudget&) = default;
};

struct Task {
  std::string id;
  std::shared_ptr<const Dataset> dataset;
  int target_class = 0;
  NegBudget neg_budget;
  std::uint64_t global_seed = 0;
};

inline Task make_task(const DataManifest& m, std::string_view task_id, std::shared_ptr<const Dataset> ds,
                      NegBudget budget, std::uint64_t global_seed = 0) {
  const auto& spec = m.task(task_id);
  if (ds->name != spec.dataset) throw DataError("task " + spec.id + " belongs to dataset " + spec.dataset);
  return {spec.id, ds, ds->class_index(spec.target), budget, global_seed};
}

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> std;  // zero deviations replaced by 1

  static Standardizer fit(const Matrix& x) {
    const std::size_t d = x.rows();
    const std::size_t n = x.cols();
    Standardizer s{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
    if (n == 0) return s;
    for (std::size_t i = 0; i < d; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) sum += x(i, j);
      s.mean[i] = sum / static_cast<double>(n);
      if (n < 2) continue;
      double ss = 0.0;
      for (std::size_t j = 0; j < n; ++j) ss += (x(i, j) - s.mean[i]) * (x(i, j) - s.mean[i]);
      const double sd = std::sqrt(ss / static_cast<double>(n - 1));
      s.std[i] = sd > 0.0 ? sd : 1.0;
    }
    return s;
  }
};

inline Matrix standardize(const Matrix& x, const Standardizer& st) {
  if (x.rows() != st.mean.size()) {
    throw DimensionError("standardize: data has " + std::to_string(x.rows()) + " dimensions, standardizer " +
                         std::to_string(st.mean.size()));
  }
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = (x(i, j) - st.mean[i]) / st.std[i];
  return out;
}

struct SplitData {
  Matrix pos_train, neg_train, pos_test, neg_test;  // standardized
  Standardizer standardizer;                         // fitted on raw pos_train
  std::vector<std::size_t> pos_train_index, neg_train_index, pos_test_index, neg_test_index;
  std::size_t neg_pool_size = 0;  // negatives available in the 70% pool
};

inline constexpr double kTrainFraction = 0.7;
inline constexpr std::size_t kRepeats = 5;

inline std::uint64_t split_seed(const Task& task, std::size_t repeat) {
  return SeedHasher().add("split").add(task.global_seed).add(task.dataset->name).add(task.target_class).add(repeat).value();
}

// Stratified 70/30 split (floor per class), negatives subsampled by taking
// a prefix of one shuffled pool so smaller budgets nest inside larger ones.
inline SplitData make_split(const Task& task, std::size_t repeat) {
  const Dataset& ds = *task.dataset;
  if (repeat >= kRepeats) throw std::invalid_argument("make_split: repeat index must be < 5");
  if (task.target_class < 0 || task.target_class >= static_cast<int>(ds.class_count())) {
    throw std::invalid_argument("make_split: invalid target class");
  }
  const std::uint64_t seed = split_seed(task, repeat);
  Rng rng(seed);

  SplitData out;
  std::vector<std::size_t> neg_pool;
  for (int c = 0; c < static_cast<int>(ds.class_count()); ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < ds.size(); ++j)
      if (ds.labels[j] == c) idx.push_back(j);
    if (idx.size() < 2) throw DataError("make_split: class " + ds.class_names[c] + " has fewer than 2 samples");
    rng.shuffle(std::span(idx));
    const auto n_train = static_cast<std::size_t>(std::floor(kTrainFraction * static_cast<double>(idx.size())));
    auto mid = idx.begin() + static_cast<std::ptrdiff_t>(n_train);
    if (c == task.target_class) {
      out.pos_train_index.assign(idx.begin(), mid);
      out.pos_test_index.assign(mid, idx.end());
    } else {
      neg_pool.insert(neg_pool.end(), idx.begin(), mid);
      out.neg_test_index.insert(out.neg_test_index.end(), mid, idx.end());
    }
  }

  Rng neg_rng(SeedHasher().add("negatives").add(seed).value());
  neg_rng.shuffle(std::span(neg_pool));
  out.neg_pool_size = neg_pool.size();
  neg_pool.resize(task.neg_budget.apply(neg_pool.size()));
  out.neg_train_index = std::move(neg_pool);

  const Matrix raw_pos = ds.features.select_cols(out.pos_train_index);
  out.standardizer = Standardizer::fit(raw_pos);
  out.pos_train = standardize(raw_pos, out.standardizer);
  out.neg_train = standardize(ds.features.select_cols(out.neg_train_index), out.standardizer);
  out.pos_test = standardize(ds.features.select_cols(out.pos_test_index), out.standardizer);
  out.neg_test = standardize(ds.features.select_cols(out.neg_test_index), out.standardizer);
  return out;
}

}  // namespace grkneg
