#pragma once

// Experiment harness: pooled 5-fold cross-validation over the hyperparameter
// grids, Gmean evaluation, the (task × budget × repeat × method) matrix and
// its aggregation into tables and plot series.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "grkneg/data.hpp"
#include "grkneg/pipeline.hpp"

namespace grkneg {

struct HyperGrid {
  std::vector<double> s_values;
  std::vector<double> c_values;
  std::vector<double> nu_values;

  static HyperGrid standard() {
    return {{1e-1, 1e0, 1e1, 1e2, 1e3}, {1e-3, 1e-2, 1e-1, 1e0, 1e1, 1e2, 1e3}, {0.05, 0.1, 0.15, 0.2}};
  }

  const std::vector<double>& params_for(const Method& m) const { return m.one_class() ? nu_values : c_values; }

  std::size_t size_for(const Method& m) const { return s_values.size() * params_for(m).size(); }
};

struct Counts {
  std::size_t tp = 0, fn = 0, tn = 0, fp = 0;

  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    fn += o.fn;
    tn += o.tn;
    fp += o.fp;
    return *this;
  }
};

struct EvalResult {
  double tpr = 0.0;
  double tnr = 0.0;
  double gmean = 0.0;  // 0..100
};

inline EvalResult gmean(std::size_t tp, std::size_t fn, std::size_t tn, std::size_t fp) {
  if (tp + fn == 0 || tn + fp == 0) throw std::invalid_argument("gmean: both classes must be present");
  EvalResult r;
  r.tpr = static_cast<double>(tp) / static_cast<double>(tp + fn);
  r.tnr = static_cast<double>(tn) / static_cast<double>(tn + fp);
  r.gmean = 100.0 * std::sqrt(r.tpr * r.tnr);
  return r;
}

inline EvalResult gmean(const Counts& c) { return gmean(c.tp, c.fn, c.tn, c.fp); }

inline Counts count_predictions(const std::vector<double>& pos_values, const std::vector<double>& neg_values) {
  Counts c;
  for (double v : pos_values) (is_positive(v) ? c.tp : c.fn)++;
  for (double v : neg_values) (is_positive(v) ? c.fp : c.tn)++;
  return c;
}

// Coordinates of one experiment cell; they alone determine every seed.
struct CellId {
  std::string task;
  NegBudget budget;
  std::size_t repeat = 0;
  Method method;
  std::uint64_t global_seed = 0;
};

inline constexpr std::size_t kFolds = 5;
inline constexpr std::size_t kFinalFit = kFolds;  // pseudo fold index of the full-training refit

inline std::uint64_t reference_seed(const CellId& cell, std::size_t fold) {
  return SeedHasher()
      .add("reference")
      .add(cell.global_seed)
      .add(cell.task)
      .add(cell.budget.str())
      .add(cell.repeat)
      .add(cell.method.str())
      .add(fold)
      .value();
}

struct CvOptions {
  std::vector<std::size_t> fold_order;  // empty means 0..4
  SolverConfig solver;
};

struct CvOutcome {
  Hyperparams best;
  double best_gmean = -1.0;
  std::vector<std::pair<Hyperparams, double>> scores;  // grid order; -1 marks a failed point
};

// Pooled 5-fold CV: samples go to fold (index mod 5) within each class, all
// held-out predictions for a grid point are pooled into one Gmean, and the
// first grid point (s outer, nu/C inner, both ascending) with the best score wins.
inline CvOutcome cross_validate(const SplitData& split, const Method& method, const HyperGrid& grid,
                                const CellId& cell, const CvOptions& opt = {}) {
  const auto& params = grid.params_for(method);
  if (grid.s_values.empty() || params.empty()) throw std::invalid_argument("cross_validate: empty grid");
  CvOutcome out;
  if (grid.s_values.size() == 1 && params.size() == 1) {
    out.best = {grid.s_values.front(), params.front()};
    out.scores.push_back({out.best, -1.0});
    return out;
  }
  const std::size_t p = split.pos_train.cols();
  const std::size_t n = split.neg_train.cols();
  if (p < kFolds) throw std::invalid_argument("cross_validate: need at least 5 positive training samples");
  if (n == 0) throw std::invalid_argument("cross_validate: no negative samples to score with");

  std::vector<std::size_t> order = opt.fold_order;
  if (order.empty()) {
    order.resize(kFolds);
    std::iota(order.begin(), order.end(), 0);
  }

  const std::size_t n_points = grid.s_values.size() * params.size();
  std::vector<Counts> pooled(n_points);
  std::vector<bool> failed(n_points, false);

  for (std::size_t fold : order) {
    std::vector<std::size_t> tr_p, ho_p, tr_n, ho_n;
    for (std::size_t i = 0; i < p; ++i) (i % kFolds == fold ? ho_p : tr_p).push_back(i);
    for (std::size_t i = 0; i < n; ++i) (i % kFolds == fold ? ho_n : tr_n).push_back(i);
    const Matrix pos_tr = split.pos_train.select_cols(tr_p);
    const Matrix pos_ho = split.pos_train.select_cols(ho_p);
    const Matrix neg_tr = split.neg_train.select_cols(tr_n);
    const Matrix neg_ho = split.neg_train.select_cols(ho_n);

    std::optional<Matrix> reference;
    if (method.kind == Method::Kind::OcsvmGrk) {
      Rng rng(reference_seed(cell, fold));
      reference = build_reference_set(method.strategy(), pos_tr, neg_tr, rng);
    }
    const Matrix held = hconcat(pos_ho, neg_ho);

    for (std::size_t si = 0; si < grid.s_values.size(); ++si) {
      std::optional<KernelModel> km;
      Matrix test_k;
      try {
        km = build_kernel(method, pos_tr, neg_tr, sigma_from_s(pos_tr, grid.s_values[si]),
                          reference ? &*reference : nullptr);
        test_k = km->test_kernel(held);
      } catch (const std::exception&) {
        for (std::size_t pi = 0; pi < params.size(); ++pi) failed[si * params.size() + pi] = true;
        continue;
      }
      for (std::size_t pi = 0; pi < params.size(); ++pi) {
        const std::size_t g = si * params.size() + pi;
        if (failed[g]) continue;
        try {
          const SvmModel model = solve(*km, params[pi], opt.solver);
          const auto values = decide(model, test_k);
          const std::vector<double> pv(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(ho_p.size()));
          const std::vector<double> nv(values.begin() + static_cast<std::ptrdiff_t>(ho_p.size()), values.end());
          pooled[g] += count_predictions(pv, nv);
        } catch (const std::exception&) {
          failed[g] = true;
        }
      }
    }
  }

  for (std::size_t si = 0; si < grid.s_values.size(); ++si) {
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
      const std::size_t g = si * params.size() + pi;
      const Hyperparams h{grid.s_values[si], params[pi]};
      const double score = failed[g] ? -1.0 : gmean(pooled[g]).gmean;
      out.scores.push_back({h, score});
      if (score > out.best_gmean) {
        out.best_gmean = score;
        out.best = h;
      }
    }
  }
  if (out.best_gmean < 0.0) throw ConvergenceError("cross_validate: every grid point failed");
  return out;
}

struct RunRecord {
  std::string method;
  std::string task;
  std::string budget;
  std::size_t repeat = 0;
  Hyperparams hyper;
  double cv_gmean = 0.0;
  Counts counts;
  EvalResult eval;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

struct RunOptions {
  HyperGrid grid = HyperGrid::standard();
  std::optional<Hyperparams> fixed;  // skip CV and use these
  SolverConfig solver;
};

// Split, cross-validate, refit on the full training set, score the test set.
// Failures are reported in the record, never thrown.
inline RunRecord run_cell(const Task& task, std::size_t repeat, const Method& method, const RunOptions& opt = {}) {
  RunRecord rec;
  rec.method = method.str();
  rec.task = task.id;
  rec.budget = task.neg_budget.str();
  rec.repeat = repeat;
  const CellId cell{task.id, task.neg_budget, repeat, method, task.global_seed};
  try {
    const SplitData split = make_split(task, repeat);
    if (opt.fixed) {
      rec.hyper = *opt.fixed;
      rec.cv_gmean = -1.0;
    } else {
      CvOptions cv;
      cv.solver = opt.solver;
      const CvOutcome outcome = cross_validate(split, method, opt.grid, cell, cv);
      rec.hyper = outcome.best;
      rec.cv_gmean = outcome.best_gmean;
    }
    const FittedClassifier f =
        fit(method, split.pos_train, split.neg_train, rec.hyper, reference_seed(cell, kFinalFit), opt.solver);
    rec.counts = count_predictions(f.decision_values(split.pos_test), f.decision_values(split.neg_test));
    rec.eval = gmean(rec.counts);
  } catch (const std::exception& e) {
    rec.status = std::string("error: ") + e.what();
  }
  return rec;
}

// Requested sub-matrix of the study.
struct MatrixSpec {
  std::vector<std::string> tasks;
  std::vector<Method> methods;
  std::vector<NegBudget> budgets;
  std::size_t repeats = kRepeats;
  std::uint64_t global_seed = 0;

  std::size_t size() const { return tasks.size() * methods.size() * budgets.size() * repeats; }
};

struct CellRef {
  std::string task;
  Method method;
  NegBudget budget;
  std::size_t repeat = 0;
};

// Budget-major, then method, task, repeat.
inline std::vector<CellRef> enumerate_cells(const MatrixSpec& spec) {
  std::vector<CellRef> cells;
  cells.reserve(spec.size());
  for (const auto& b : spec.budgets)
    for (const auto& m : spec.methods)
      for (const auto& t : spec.tasks)
        for (std::size_t r = 0; r < spec.repeats; ++r) cells.push_back({t, m, b, r});
  return cells;
}

// Loads each dataset once and runs every cell; output order follows
// enumerate_cells regardless of `parallelism`.
inline std::vector<RunRecord> run_matrix(const DataManifest& manifest, const MatrixSpec& spec,
                                         const RunOptions& opt = {}, std::size_t parallelism = 1,
                                         const std::function<void(const RunRecord&)>& on_done = {}) {
  std::map<std::string, std::shared_ptr<const Dataset>> datasets;
  for (const auto& t : spec.tasks) {
    const auto& name = manifest.task(t).dataset;
    if (!datasets.count(name)) datasets[name] = std::make_shared<const Dataset>(load_bundled(manifest, name));
  }
  const auto cells = enumerate_cells(spec);
  std::vector<RunRecord> records(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex done_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const auto& c = cells[i];
      const Task task = make_task(manifest, c.task, datasets.at(manifest.task(c.task).dataset), c.budget,
                                  spec.global_seed);
      records[i] = run_cell(task, c.repeat, c.method, opt);
      if (on_done) {
        std::lock_guard lock(done_mutex);
        on_done(records[i]);
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(parallelism, cells.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  return records;
}

// Aggregation

struct TaskSummary {
  std::string method, budget, task;
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation over repeats, 0 for a single record
};

struct GrandSummary {
  std::string method, budget;
  std::size_t n_tasks = 0;
  double mean = 0.0;      // mean of per-task means
  double mean_std = 0.0;  // mean of per-task standard deviations
};

struct Summary {
  std::vector<TaskSummary> tasks;
  std::vector<GrandSummary> grand;
  std::vector<std::string> missing;  // "method,task,budget,repeat[,reason]"

  bool complete() const { return missing.empty(); }

  const GrandSummary* find_grand(std::string_view method, std::string_view budget) const {
    for (const auto& g : grand)
      if (g.method == method && g.budget == budget) return &g;
    return nullptr;
  }

  const TaskSummary* find_task(std::string_view method, std::string_view budget, std::string_view task) const {
    for (const auto& t : tasks)
      if (t.method == method && t.budget == budget && t.task == task) return &t;
    return nullptr;
  }
};

inline std::pair<double, double> mean_and_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

// Groups successful records by (method, budget, task). When `spec` is given,
// ordering follows it and cells without a successful record are listed as missing.
inline Summary aggregate(const std::vector<RunRecord>& records, const MatrixSpec* spec = nullptr) {
  std::vector<std::string> methods, budgets, tasks;
  auto note = [](std::vector<std::string>& v, const std::string& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
  };
  if (spec) {
    for (const auto& m : spec->methods) note(methods, m.str());
    for (const auto& b : spec->budgets) note(budgets, b.str());
    for (const auto& t : spec->tasks) note(tasks, t);
  }
  for (const auto& r : records) {
    note(methods, r.method);
    note(budgets, r.budget);
    note(tasks, r.task);
  }

  std::map<std::tuple<std::string, std::string, std::string>, std::map<std::size_t, double>> groups;
  for (const auto& r : records)
    if (r.ok()) groups[{r.method, r.budget, r.task}][r.repeat] = r.eval.gmean;

  Summary s;
  if (spec) {
    std::map<std::tuple<std::string, std::string, std::string, std::size_t>, std::string> failures;
    for (const auto& r : records)
      if (!r.ok()) failures[{r.method, r.budget, r.task, r.repeat}] = r.status;
    for (const auto& c : enumerate_cells(*spec)) {
      const auto it = groups.find({c.method.str(), c.budget.str(), c.task});
      if (it != groups.end() && it->second.count(c.repeat)) continue;
      std::string line = c.method.str() + "," + c.task + "," + c.budget.str() + "," + std::to_string(c.repeat);
      const auto f = failures.find({c.method.str(), c.budget.str(), c.task, c.repeat});
      if (f != failures.end()) line += "," + f->second;
      s.missing.push_back(std::move(line));
    }
  }

  for (const auto& b : budgets) {
    for (const auto& m : methods) {
      GrandSummary g{m, b};
      double std_sum = 0.0;
      for (const auto& t : tasks) {
        const auto it = groups.find({m, b, t});
        if (it == groups.end()) continue;
        std::vector<double> v;
        for (const auto& [rep, val] : it->second) v.push_back(val);
        const auto [mean, sd] = mean_and_std(v);
        s.tasks.push_back({m, b, t, v.size(), mean, sd});
        g.mean += mean;
        std_sum += sd;
        ++g.n_tasks;
      }
      if (g.n_tasks == 0) continue;
      g.mean /= static_cast<double>(g.n_tasks);
      g.mean_std = std_sum / static_cast<double>(g.n_tasks);
      s.grand.push_back(g);
    }
  }
  return s;
}

// Output

inline std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline void write_results_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << "method,task,budget,repeat,s,param,cv_gmean,tp,fn,tn,fp,tpr,tnr,gmean,status\n";
  for (const auto& r : records) {
    os << r.method << ',' << r.task << ',' << r.budget << ',' << r.repeat << ',' << fmt_num(r.hyper.s) << ','
       << fmt_num(r.hyper.param) << ',' << fmt_num(r.cv_gmean) << ',' << r.counts.tp << ',' << r.counts.fn << ','
       << r.counts.tn << ',' << r.counts.fp << ',' << fmt_num(r.eval.tpr) << ',' << fmt_num(r.eval.tnr) << ','
       << fmt_num(r.eval.gmean) << ',';
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    os << status << '\n';
  }
}

inline void write_summary_csv(std::ostream& os, const Summary& s) {
  os << "method,budget,task,n,mean_gmean,std_gmean\n";
  for (const auto& t : s.tasks)
    os << t.method << ',' << t.budget << ',' << t.task << ',' << t.n << ',' << fmt_num(t.mean) << ','
       << fmt_num(t.std) << '\n';
  for (const auto& g : s.grand)
    os << g.method << ',' << g.budget << ",Aver.," << g.n_tasks << ',' << fmt_num(g.mean) << ','
       << fmt_num(g.mean_std) << '\n';
}

// One table per budget: tasks down, methods across, "mean±std" cells.
inline void write_summary_markdown(std::ostream& os, const Summary& s) {
  std::vector<std::string> budgets, methods, tasks;
  auto note = [](std::vector<std::string>& v, const std::string& x) {
    if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
  };
  for (const auto& t : s.tasks) {
    note(budgets, t.budget);
    note(methods, t.method);
    note(tasks, t.task);
  }
  for (const auto& b : budgets) {
    os << "### " << (b == "all" ? std::string("All") : b) << " negative samples\n\n| Task |";
    for (const auto& m : methods) os << ' ' << m << " |";
    os << "\n|---|";
    for (std::size_t i = 0; i < methods.size(); ++i) os << "---|";
    os << '\n';
    for (const auto& t : tasks) {
      os << "| " << t << " |";
      for (const auto& m : methods) {
        const auto* ts = s.find_task(m, b, t);
        os << ' ' << (ts ? fmt_fixed(ts->mean, 1) + "±" + fmt_fixed(ts->std, 1) : std::string("-")) << " |";
      }
      os << '\n';
    }
    os << "| Aver. |";
    for (const auto& m : methods) {
      const auto* g = s.find_grand(m, b);
      os << ' ' << (g ? fmt_fixed(g->mean, 1) + "±" + fmt_fixed(g->mean_std, 1) : std::string("-")) << " |";
    }
    os << "\n\n";
  }
  if (!s.missing.empty()) os << "Missing cells: " << s.missing.size() << "\n";
}

// Average-Gmean curves: (a) training samples as references, (b) generated
// references, (c) training plus generated references, (d) standard methods.
inline const std::vector<std::pair<std::string, std::vector<std::string>>>& plot_panels() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> panels = {
      {"a", {"grk1", "grk2", "grk3"}},
      {"b", {"grk4", "grk5", "grk6"}},
      {"c", {"grk7", "grk8", "grk9"}},
      {"d", {"ocsvm", "svm", "grk3", "grk7"}},
  };
  return panels;
}

inline void write_plot_series(std::ostream& os, const Summary& s, const std::vector<std::string>& methods) {
  os << "budget,method,mean_gmean\n";
  for (const auto& m : methods)
    for (const auto& g : s.grand)
      if (g.method == m) os << g.budget << ',' << m << ',' << fmt_num(g.mean) << '\n';
}

inline void write_outputs(const std::filesystem::path& dir, const std::vector<RunRecord>& records, const Summary& s) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("results.csv");
    write_results_csv(f, records);
  }
  {
    auto f = open("summary.csv");
    write_summary_csv(f, s);
  }
  {
    auto f = open("summary.md");
    write_summary_markdown(f, s);
  }
  for (const auto& [panel, methods] : plot_panels()) {
    auto f = open(("fig1_" + panel + ".csv").c_str());
    write_plot_series(f, s, methods);
  }
  auto f = open("missing.txt");
  for (const auto& m : s.missing) f << m << '\n';
}

}  // namespace grkneg
