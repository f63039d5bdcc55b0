// grkneg: train, predict, evaluate and reproduce one-class experiments.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "grkneg/harness.hpp"
#include "grkneg/model_io.hpp"

#ifndef GRKNEG_DATA_DIR
#define GRKNEG_DATA_DIR "data"
#endif

namespace {

using namespace grkneg;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOpts {
  std::string data_dir = GRKNEG_DATA_DIR;
  std::uint64_t seed = 0;
};

struct ModelOpts {
  std::string task;
  std::string data;
  std::string target_class;
  int label_column = -1;
  std::string method = "grk7";
  int variant = 0;
  std::string budget = "5";
  std::size_t repeat = 0;
  std::optional<double> s, c, nu;
  bool auto_cv = false;
  std::string out;
};

void add_model_flags(CLI::App* cmd, ModelOpts& o) {
  cmd->add_option("--task", o.task, "Bundled task id (see list-tasks), e.g. Iris1");
  cmd->add_option("--data", o.data, "Bundled dataset name or path to a delimited file");
  cmd->add_option("--target-class", o.target_class, "Raw label of the positive class");
  cmd->add_option("--label-column", o.label_column, "Label column for --data files (negative counts from the end)");
  cmd->add_option("--method", o.method, "ocsvm | grk1..grk9 | grk | svm");
  cmd->add_option("--variant", o.variant, "Reference strategy 1..9 (with --method grk)")->check(CLI::Range(1, 9));
  cmd->add_option("--neg-budget", o.budget, "5 | 10 | 20 | 30 | all");
  cmd->add_option("--repeat", o.repeat, "Split index 0..4")->check(CLI::Range(0, 4));
  cmd->add_option("--s", o.s, "Kernel width scale s");
  cmd->add_option("--c", o.c, "C for the binary SVM");
  cmd->add_option("--nu", o.nu, "nu for one-class methods");
  cmd->add_flag("--auto-cv", o.auto_cv, "Select s and nu/C by 5-fold cross-validation");
}

Method resolve_method(const ModelOpts& o) {
  Method m;
  try {
    if (o.method == "grk") {
      m = Method::grk(o.variant ? o.variant : 7);
    } else {
      m = Method::parse(o.method);
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (o.variant && m.kind != Method::Kind::OcsvmGrk) throw UsageError("--variant is only valid with GRK methods");
  if (o.variant && m.variant != o.variant) throw UsageError("--variant disagrees with --method " + o.method);
  return m;
}

std::optional<Hyperparams> resolve_hyper(const ModelOpts& o, const Method& m) {
  if (o.auto_cv) {
    if (o.s || o.c || o.nu) throw UsageError("--auto-cv cannot be combined with --s/--c/--nu");
    return std::nullopt;
  }
  if (m.one_class() && o.c) throw UsageError("--c applies to the binary SVM only");
  if (!m.one_class() && o.nu) throw UsageError("--nu applies to one-class methods only");
  const auto param = m.one_class() ? o.nu : o.c;
  if (!o.s || !param) throw UsageError(std::string("give --s and ") + (m.one_class() ? "--nu" : "--c") + ", or --auto-cv");
  if (!(*o.s > 0.0)) throw UsageError("--s must be positive");
  if (m.one_class() && !(*param > 0.0 && *param <= 1.0)) throw UsageError("--nu must be in (0, 1]");
  if (!m.one_class() && !(*param > 0.0)) throw UsageError("--c must be positive");
  return Hyperparams{*o.s, *param};
}

NegBudget resolve_budget(const std::string& s) {
  try {
    return NegBudget::parse(s);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

const TaskSpec& known(const DataManifest& manifest, const std::string& id) {
  try {
    return manifest.task(id);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
}

void require_bundled(const DataManifest& manifest, const std::string& name) {
  for (const auto& d : manifest.datasets)
    if (d.name == name) return;
  throw UsageError("--data '" + name + "' is neither a readable file nor a bundled dataset");
}

// Builds the Task named by --task, or by --data plus --target-class.
Task resolve_task(const ModelOpts& o, const CommonOpts& common, NegBudget budget) {
  if (!o.task.empty()) {
    if (!o.data.empty() || !o.target_class.empty()) throw UsageError("--task excludes --data/--target-class");
    const auto manifest = load_manifest(common.data_dir);
    const auto& spec = known(manifest, o.task);
    auto ds = std::make_shared<const Dataset>(load_bundled(manifest, spec.dataset));
    return make_task(manifest, o.task, ds, budget, common.seed);
  }
  if (o.data.empty() || o.target_class.empty()) throw UsageError("give --task, or --data with --target-class");
  std::shared_ptr<const Dataset> ds;
  if (std::filesystem::exists(o.data)) {
    CsvSchema schema;
    schema.label_column = o.label_column;
    ds = std::make_shared<const Dataset>(load_csv(o.data, schema));
  } else {
    const auto manifest = load_manifest(common.data_dir);
    require_bundled(manifest, o.data);
    ds = std::make_shared<const Dataset>(load_bundled(manifest, o.data));
  }
  int target = 0;
  try {
    target = ds->class_index(o.target_class);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  return {ds->name + ":" + o.target_class, ds, target, budget, common.seed};
}

int cmd_train(const ModelOpts& o, const CommonOpts& common) {
  const Method method = resolve_method(o);
  const auto fixed = resolve_hyper(o, method);
  const NegBudget budget = resolve_budget(o.budget);
  if (o.out.empty()) throw UsageError("--out is required");
  const Task task = resolve_task(o, common, budget);

  const SplitData split = make_split(task, o.repeat);
  const CellId cell{task.id, budget, o.repeat, method, common.seed};
  Hyperparams hyper;
  if (fixed) {
    hyper = *fixed;
  } else {
    const auto cv = cross_validate(split, method, HyperGrid::standard(), cell);
    hyper = cv.best;
    std::cerr << "cross-validation picked s=" << fmt_num(hyper.s) << " param=" << fmt_num(hyper.param)
              << " (pooled Gmean " << fmt_fixed(cv.best_gmean, 2) << ")\n";
  }
  SavedModel model;
  const std::uint64_t ref_seed = reference_seed(cell, kFinalFit);
  model.classifier = fit(method, split.pos_train, split.neg_train, hyper, ref_seed);
  model.standardizer = split.standardizer;
  model.provenance = {task.dataset->name, task.id, task.dataset->class_names[task.target_class], budget.str(),
                      o.repeat, common.seed, split_seed(task, o.repeat), ref_seed, !fixed.has_value()};
  save_model(o.out, model);
  std::cerr << "wrote " << o.out << " (" << method.str() << ", " << split.pos_train.cols() << " positives, "
            << split.neg_train.cols() << " negatives)\n";
  return 0;
}

struct PredictOpts {
  std::string model;
  std::string data;
  std::optional<int> label_column;
  std::string out;
};

int cmd_predict(const PredictOpts& o, const CommonOpts& common) {
  if (o.model.empty() || o.data.empty()) throw UsageError("--model and --data are required");
  const SavedModel model = load_model(o.model);
  Dataset ds;
  if (std::filesystem::exists(o.data)) {
    CsvSchema schema;
    schema.has_labels = o.label_column.has_value();
    schema.label_column = o.label_column.value_or(-1);
    ds = load_csv(o.data, schema);
  } else {
    const auto manifest = load_manifest(common.data_dir);
    require_bundled(manifest, o.data);
    ds = load_bundled(manifest, o.data);
  }
  const auto values = model.decision_values(ds.features);

  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out);
    if (!file) throw std::runtime_error("cannot write " + o.out);
  }
  std::ostream& os = o.out.empty() ? std::cout : file;
  const bool labelled = !ds.labels.empty();
  os << "index,decision,predicted" << (labelled ? ",label" : "") << '\n';
  Counts counts;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const bool pos = is_positive(values[j]);
    os << j << ',' << fmt_num(values[j]) << ',' << (pos ? 1 : -1);
    if (labelled) {
      const std::string& label = ds.class_names[ds.labels[j]];
      os << ',' << label;
      const bool truth = label == model.provenance.target_class;
      (truth ? (pos ? counts.tp : counts.fn) : (pos ? counts.fp : counts.tn))++;
    }
    os << '\n';
  }
  if (labelled && counts.tp + counts.fn > 0 && counts.tn + counts.fp > 0) {
    const auto r = gmean(counts);
    std::cerr << "TPR " << fmt_fixed(r.tpr, 4) << "  TNR " << fmt_fixed(r.tnr, 4) << "  Gmean "
              << fmt_fixed(r.gmean, 2) << '\n';
  }
  return 0;
}

int cmd_evaluate(const ModelOpts& o, const CommonOpts& common) {
  const Method method = resolve_method(o);
  const auto fixed = resolve_hyper(o, method);
  const Task task = resolve_task(o, common, resolve_budget(o.budget));
  RunOptions opt;
  opt.fixed = fixed;
  const RunRecord rec = run_cell(task, o.repeat, method, opt);
  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out);
    if (!file) throw std::runtime_error("cannot write " + o.out);
  }
  write_results_csv(o.out.empty() ? std::cout : file, {rec});
  if (!rec.ok()) {
    std::cerr << rec.status << '\n';
    return kExitRuntime;
  }
  return 0;
}

struct ReproduceOpts {
  std::vector<std::string> methods{"ocsvm", "grk7", "svm"};
  std::vector<std::string> budgets{"5", "10", "20", "30", "all"};
  std::vector<std::string> tasks;
  std::size_t repeats = kRepeats;
  std::size_t parallelism = 1;
  std::string out = "results";
  bool quiet = false;
};

int cmd_reproduce(const ReproduceOpts& o, const CommonOpts& common) {
  if (o.methods.empty()) throw UsageError("--methods must name at least one method");
  if (o.budgets.empty()) throw UsageError("--budgets must name at least one budget");
  if (o.repeats == 0 || o.repeats > kRepeats) throw UsageError("--repeats must be 1..5");
  if (o.parallelism == 0) throw UsageError("--parallelism must be >= 1");
  MatrixSpec spec;
  spec.repeats = o.repeats;
  spec.global_seed = common.seed;
  try {
    for (const auto& m : o.methods) spec.methods.push_back(Method::parse(m));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  for (const auto& b : o.budgets) spec.budgets.push_back(resolve_budget(b));
  const auto manifest = load_manifest(common.data_dir);
  if (o.tasks.empty()) {
    for (const auto& t : manifest.tasks) spec.tasks.push_back(t.id);
  } else {
    for (const auto& t : o.tasks) spec.tasks.push_back(known(manifest, t).id);
  }

  std::size_t done = 0;
  const std::size_t total = spec.size();
  const auto records = run_matrix(manifest, spec, {}, o.parallelism, [&](const RunRecord& r) {
    ++done;
    if (!o.quiet) {
      std::cerr << '[' << done << '/' << total << "] " << r.method << ' ' << r.task << " budget=" << r.budget
                << " repeat=" << r.repeat << ' '
                << (r.ok() ? "gmean=" + fmt_fixed(r.eval.gmean, 1) : r.status) << '\n';
    }
  });
  const Summary summary = aggregate(records, &spec);
  write_outputs(o.out, records, summary);
  write_summary_markdown(std::cout, summary);
  if (!summary.complete()) {
    std::cerr << summary.missing.size() << " cells failed; see " << (std::filesystem::path(o.out) / "missing.txt")
              << '\n';
    return kExitRuntime;
  }
  return 0;
}

int cmd_list_tasks(const CommonOpts& common) {
  const auto manifest = load_manifest(common.data_dir);
  std::cout << "task,dataset,target,C,N_tot,D,P,surrogate\n";
  for (const auto& t : manifest.tasks) {
    const auto& entry = manifest.dataset(t.dataset);
    const Dataset ds = load_bundled(manifest, t.dataset);
    const int c = ds.class_index(t.target);
    const auto p = static_cast<std::size_t>(std::floor(kTrainFraction * static_cast<double>(ds.class_size(c))));
    std::cout << t.id << ',' << ds.name << ',' << entry.display_names[static_cast<std::size_t>(c)] << ','
              << ds.class_count() << ',' << ds.size() << ',' << ds.dims() << ',' << p << ','
              << (entry.surrogate ? "yes" : "no") << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-class SVM with generalized reference kernels built from negative samples"};
  app.require_subcommand(1);
  CommonOpts common;
  app.add_option("--data-dir", common.data_dir, "Directory holding manifest.json and the bundled datasets");
  app.add_option("--seed", common.seed, "Global seed mixed into every split and reference draw");

  ModelOpts train_opts;
  auto* train = app.add_subcommand("train", "Fit a model on one task split and write a model file");
  add_model_flags(train, train_opts);
  train->add_option("--out", train_opts.out, "Model file to write")->required();

  PredictOpts predict_opts;
  auto* predict = app.add_subcommand("predict", "Score raw samples with a saved model");
  predict->add_option("--model", predict_opts.model, "Model file")->required();
  predict->add_option("--data", predict_opts.data, "Delimited file of raw features, or a bundled dataset name")
      ->required();
  predict->add_option("--label-column", predict_opts.label_column, "Label column in --data, if any");
  predict->add_option("--out", predict_opts.out, "Write predictions here instead of stdout");

  ModelOpts eval_opts;
  auto* evaluate = app.add_subcommand("evaluate", "Run one experiment cell and print its result record");
  add_model_flags(evaluate, eval_opts);
  evaluate->add_option("--out", eval_opts.out, "Write the record here instead of stdout");

  ReproduceOpts repro;
  auto* reproduce = app.add_subcommand("reproduce", "Run the task x budget x repeat matrix and summarize");
  reproduce->add_option("--methods", repro.methods, "Methods to run")->delimiter(',');
  reproduce->add_option("--budgets", repro.budgets, "Negative budgets")->delimiter(',');
  reproduce->add_option("--tasks", repro.tasks, "Task ids (default: all)")->delimiter(',');
  reproduce->add_option("--repeats", repro.repeats, "Number of splits (1..5)");
  reproduce->add_option("--parallelism", repro.parallelism, "Worker threads");
  reproduce->add_option("--out", repro.out, "Output directory");
  reproduce->add_flag("--quiet", repro.quiet, "No per-cell progress");

  auto* list = app.add_subcommand("list-tasks", "Print the bundled one-class tasks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (train->parsed()) return cmd_train(train_opts, common);
    if (predict->parsed()) return cmd_predict(predict_opts, common);
    if (evaluate->parsed()) return cmd_evaluate(eval_opts, common);
    if (reproduce->parsed()) return cmd_reproduce(repro, common);
    if (list->parsed()) return cmd_list_tasks(common);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
