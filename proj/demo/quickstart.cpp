// Fits a standard one-class SVM and the GRK variant-7 model on one bundled
// task with five negative samples, then compares their test Gmean.

#include <iostream>
#include <memory>

#include "grkneg/harness.hpp"

#ifndef GRKNEG_DATA_DIR
#define GRKNEG_DATA_DIR "data"
#endif

int main(int argc, char** argv) {
  using namespace grkneg;
  const std::string task_id = argc > 1 ? argv[1] : "Ion2";
  try {
    const DataManifest manifest = load_manifest(GRKNEG_DATA_DIR);
    const auto ds = std::make_shared<const Dataset>(load_bundled(manifest, manifest.task(task_id).dataset));
    const Task task = make_task(manifest, task_id, ds, NegBudget::of(5));
    const SplitData split = make_split(task, 0);
    std::cout << task_id << ": " << split.pos_train.cols() << " positive and " << split.neg_train.cols()
              << " negative training samples, " << split.pos_test.cols() + split.neg_test.cols()
              << " test samples\n";

    for (const Method& method : {Method::ocsvm(), Method::grk(7)}) {
      const CellId cell{task.id, task.neg_budget, 0, method};
      const CvOutcome cv = cross_validate(split, method, HyperGrid::standard(), cell);
      const FittedClassifier f =
          fit(method, split.pos_train, split.neg_train, cv.best, reference_seed(cell, kFinalFit));
      const EvalResult r =
          gmean(count_predictions(f.decision_values(split.pos_test), f.decision_values(split.neg_test)));
      std::cout << "  " << method.str() << ": s=" << cv.best.s << " nu=" << cv.best.param
                << "  TPR=" << fmt_fixed(r.tpr, 3) << " TNR=" << fmt_fixed(r.tnr, 3)
                << "  Gmean=" << fmt_fixed(r.gmean, 1) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
