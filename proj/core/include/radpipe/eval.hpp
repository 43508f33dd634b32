#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "radpipe/features.hpp"
#include "radpipe/tagging.hpp"  // Prf
#include "radpipe/tree.hpp"

namespace radpipe {

struct FoldPlan {
  int k = 5;
  uint64_t seed = 0;
  std::vector<int> assignments;  // report index -> fold id
};

/// Within each class, indices are shuffled by the seeded RNG and dealt
/// round-robin, so per-class fold sizes differ by at most one. Throws when
/// a class has fewer than k members.
FoldPlan stratified_kfold(const std::vector<int>& labels, int k, uint64_t seed);

/// Standard precision/recall/F1 for the positive class, 0 when a
/// denominator is 0.
Prf binary_prf(std::span<const int> gold, std::span<const int> pred, int positive_class = 1);

struct Confusion {
  long tp = 0, fp = 0, fn = 0, tn = 0;
  Prf prf() const { return prf_from_counts(tp, fp, fn); }
};

Confusion confusion_counts(std::span<const int> gold, std::span<const int> pred,
                           int positive_class = 1);

enum class ClassifierKind { Logistic, Tree, Forest, Svm };

const char* to_string(ClassifierKind k);
std::optional<ClassifierKind> classifier_from_string(std::string_view s);

struct CvHyperparams {
  // Lasso selection: lambda picked by inner 5-fold CV over a 20-point log
  // grid from lambda_max down to lambda_max/1000 unless fixed here.
  std::optional<double> lasso_lambda;
  int lasso_inner_folds = 5;
  int lasso_grid = 20;

  double logistic_l2 = 1e-4;
  int tree_max_depth = 0;
  int forest_trees = 100;
  int forest_mtry = 0;  // 0 = ceil(sqrt(p))
  int forest_max_depth = 0;
  int forest_threads = 1;
  double svm_lambda = 1e-2;
  int svm_epochs = 200;

  // When > 0, the feature vocabulary is rebuilt from the training rows of
  // each fold at this document-count threshold (leakage-safe mode); 0 uses
  // the matrix columns as-is (the paper's global construction).
  int fold_min_count = 0;

  uint64_t seed = 0;
};

struct FoldResult {
  Confusion confusion;
  std::vector<int> columns;  // columns visible to the classifier (matrix indices)
  std::vector<int> support;  // lasso-selected columns (matrix indices); empty without lasso
  double lasso_lambda = 0.0;
};

struct ModelCvResult {
  ClassifierKind kind = ClassifierKind::Logistic;
  bool with_lasso = false;
  std::vector<FoldResult> folds;
  Prf mean;          // arithmetic mean of per-fold P/R/F1
  Confusion pooled;  // summed confusion over folds
  std::vector<int> pooled_pred;  // prediction per matrix row
};

/// Per fold: optionally rebuild the vocabulary from training rows, fit
/// Lasso and reduce columns (when use_lasso), fit the classifier, predict
/// the held-out rows. Deterministic given the plan and hyperparams.
ModelCvResult run_cv(const FeatureMatrix& matrix, const FoldPlan& plan, ClassifierKind kind,
                     bool use_lasso, const CvHyperparams& hp);

/// Descending Gini importance over the vocabulary keys; zero-importance
/// keys are omitted, ties ordered by key. Scores sum to 1 when any split
/// exists.
std::vector<std::pair<std::string, double>> rank_importances(const Forest& forest,
                                                             const std::vector<std::string>& keys);

}  // namespace radpipe
