#include "radpipe/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "radpipe/rng.hpp"

namespace radpipe {

FoldPlan stratified_kfold(const std::vector<int>& labels, int k, uint64_t seed) {
  if (k < 2) throw std::invalid_argument("stratified_kfold: k must be >= 2");
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(labels.size(), -1);

  Rng rng(seed);
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<int> idx;
    for (size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) idx.push_back(static_cast<int>(i));
    if (static_cast<int>(idx.size()) < k)
      throw std::invalid_argument("stratified_kfold: class " + std::to_string(cls) +
                                  " has fewer than k members");
    rng.shuffle(idx);
    for (size_t j = 0; j < idx.size(); ++j)
      plan.assignments[idx[j]] = static_cast<int>(j % static_cast<size_t>(k));
  }
  for (size_t i = 0; i < labels.size(); ++i)
    if (plan.assignments[i] < 0)
      throw std::invalid_argument("stratified_kfold: labels must be 0 or 1");
  return plan;
}

Confusion confusion_counts(std::span<const int> gold, std::span<const int> pred,
                           int positive_class) {
  if (gold.size() != pred.size())
    throw std::invalid_argument("confusion_counts: length mismatch");
  Confusion c;
  for (size_t i = 0; i < gold.size(); ++i) {
    const bool g = gold[i] == positive_class;
    const bool p = pred[i] == positive_class;
    if (g && p) ++c.tp;
    else if (!g && p) ++c.fp;
    else if (g && !p) ++c.fn;
    else ++c.tn;
  }
  return c;
}

Prf binary_prf(std::span<const int> gold, std::span<const int> pred, int positive_class) {
  return confusion_counts(gold, pred, positive_class).prf();
}

const char* to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::Logistic: return "lr";
    case ClassifierKind::Tree: return "dt";
    case ClassifierKind::Forest: return "rf";
    case ClassifierKind::Svm: return "svm";
  }
  return "?";
}

std::optional<ClassifierKind> classifier_from_string(std::string_view s) {
  if (s == "lr") return ClassifierKind::Logistic;
  if (s == "dt") return ClassifierKind::Tree;
  if (s == "rf") return ClassifierKind::Forest;
  if (s == "svm") return ClassifierKind::Svm;
  return std::nullopt;
}

namespace {

BinaryRows take_rows(const FeatureMatrix& m, const std::vector<int>& rows,
                     const std::vector<int>& cols) {
  BinaryRows out;
  out.reserve(rows.size());
  for (int r : rows) {
    std::vector<uint8_t> row(cols.size());
    for (size_t j = 0; j < cols.size(); ++j) row[j] = m.x[r][cols[j]];
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<int> take_labels(const FeatureMatrix& m, const std::vector<int>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (int r : rows) out.push_back(m.labels[r]);
  return out;
}

/// Columns whose training-rows document count reaches min_count, in the
/// original column order.
std::vector<int> fold_columns(const FeatureMatrix& m, const std::vector<int>& train_rows,
                              int min_count) {
  std::vector<int> cols;
  if (min_count <= 0) {
    cols.resize(m.cols());
    for (int j = 0; j < m.cols(); ++j) cols[j] = j;
    return cols;
  }
  for (int j = 0; j < m.cols(); ++j) {
    long c = 0;
    for (int r : train_rows) c += m.x[r][j];
    if (c >= min_count) cols.push_back(j);
  }
  return cols;
}

/// Inner-CV choice of the lasso penalty: best mean F1 over the grid,
/// ties resolved toward the larger (sparser) lambda.
double choose_lasso_lambda(const BinaryRows& x, const std::vector<int>& y,
                           const CvHyperparams& hp, uint64_t seed) {
  const double lmax = lasso_lambda_max(x, y);
  if (lmax <= 0.0) return 0.0;
  const int grid_n = std::max(2, hp.lasso_grid);

  FoldPlan inner = stratified_kfold(y, hp.lasso_inner_folds, seed);
  double best_f1 = -1.0, best_lambda = lmax;
  for (int gi = 0; gi < grid_n; ++gi) {
    const double lambda = lmax * std::pow(1e-3, static_cast<double>(gi) / (grid_n - 1));
    double f1_sum = 0.0;
    for (int fold = 0; fold < inner.k; ++fold) {
      BinaryRows xtr, xte;
      std::vector<int> ytr, yte;
      for (size_t i = 0; i < x.size(); ++i) {
        if (inner.assignments[i] == fold) {
          xte.push_back(x[i]);
          yte.push_back(y[i]);
        } else {
          xtr.push_back(x[i]);
          ytr.push_back(y[i]);
        }
      }
      const LinearModel lm = fit_lasso(xtr, ytr, lambda);
      f1_sum += binary_prf(yte, predict(lm, xte)).f1;
    }
    const double mean_f1 = f1_sum / inner.k;
    if (mean_f1 > best_f1) {  // grid runs from large to small lambda: ties keep the larger
      best_f1 = mean_f1;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

std::vector<int> classify(ClassifierKind kind, const BinaryRows& xtr, const std::vector<int>& ytr,
                          const BinaryRows& xte, const CvHyperparams& hp, uint64_t seed) {
  switch (kind) {
    case ClassifierKind::Logistic:
      return predict(fit_logistic(xtr, ytr, hp.logistic_l2), xte);
    case ClassifierKind::Tree: {
      TreeOptions topt;
      topt.max_depth = hp.tree_max_depth;
      return tree_predict(*fit_tree(xtr, ytr, topt), xte);
    }
    case ClassifierKind::Forest: {
      ForestOptions fopt;
      fopt.n_trees = hp.forest_trees;
      fopt.mtry = hp.forest_mtry;
      fopt.max_depth = hp.forest_max_depth;
      fopt.seed = seed;
      fopt.n_threads = hp.forest_threads;
      return forest_predict(fit_forest(xtr, ytr, fopt), xte);
    }
    case ClassifierKind::Svm:
      return predict(fit_svm(xtr, ytr, hp.svm_lambda, hp.svm_epochs, seed), xte);
  }
  throw std::logic_error("classify: bad kind");
}

}  // namespace

ModelCvResult run_cv(const FeatureMatrix& matrix, const FoldPlan& plan, ClassifierKind kind,
                     bool use_lasso, const CvHyperparams& hp) {
  if (static_cast<int>(plan.assignments.size()) != matrix.rows())
    throw std::invalid_argument("run_cv: fold plan does not cover the matrix rows");

  ModelCvResult res;
  res.kind = kind;
  res.with_lasso = use_lasso;
  res.pooled_pred.assign(matrix.rows(), 0);

  double psum = 0.0, rsum = 0.0, fsum = 0.0;
  for (int fold = 0; fold < plan.k; ++fold) {
    std::vector<int> train_rows, test_rows;
    for (int i = 0; i < matrix.rows(); ++i)
      (plan.assignments[i] == fold ? test_rows : train_rows).push_back(i);

    FoldResult fr;
    fr.columns = fold_columns(matrix, train_rows, hp.fold_min_count);

    BinaryRows xtr = take_rows(matrix, train_rows, fr.columns);
    BinaryRows xte = take_rows(matrix, test_rows, fr.columns);
    const std::vector<int> ytr = take_labels(matrix, train_rows);
    const std::vector<int> yte = take_labels(matrix, test_rows);
    const uint64_t fold_seed = derive_seed(hp.seed, static_cast<uint64_t>(fold));

    if (use_lasso) {
      fr.lasso_lambda = hp.lasso_lambda ? *hp.lasso_lambda
                                        : choose_lasso_lambda(xtr, ytr, hp, fold_seed);
      const LinearModel lasso = fit_lasso(xtr, ytr, fr.lasso_lambda);
      const std::vector<int> sel = select_features(lasso);
      for (int j : sel) fr.support.push_back(fr.columns[j]);
      std::vector<int> reduced(sel.begin(), sel.end());
      // Retrain the classifier on the selected columns only.
      BinaryRows xtr2, xte2;
      for (const auto& row : xtr) {
        std::vector<uint8_t> r2(reduced.size());
        for (size_t j = 0; j < reduced.size(); ++j) r2[j] = row[reduced[j]];
        xtr2.push_back(std::move(r2));
      }
      for (const auto& row : xte) {
        std::vector<uint8_t> r2(reduced.size());
        for (size_t j = 0; j < reduced.size(); ++j) r2[j] = row[reduced[j]];
        xte2.push_back(std::move(r2));
      }
      xtr = std::move(xtr2);
      xte = std::move(xte2);
    }

    const std::vector<int> pred = classify(kind, xtr, ytr, xte, hp, fold_seed);
    for (size_t i = 0; i < test_rows.size(); ++i) res.pooled_pred[test_rows[i]] = pred[i];
    fr.confusion = confusion_counts(yte, pred);
    const Prf prf = fr.confusion.prf();
    psum += prf.precision;
    rsum += prf.recall;
    fsum += prf.f1;
    res.pooled.tp += fr.confusion.tp;
    res.pooled.fp += fr.confusion.fp;
    res.pooled.fn += fr.confusion.fn;
    res.pooled.tn += fr.confusion.tn;
    res.folds.push_back(std::move(fr));
  }
  res.mean.precision = psum / plan.k;
  res.mean.recall = rsum / plan.k;
  res.mean.f1 = fsum / plan.k;
  return res;
}

std::vector<std::pair<std::string, double>> rank_importances(
    const Forest& forest, const std::vector<std::string>& keys) {
  if (static_cast<int>(keys.size()) != forest.n_features)
    throw std::invalid_argument("rank_importances: key count does not match forest features");
  std::vector<std::pair<std::string, double>> out;
  for (size_t j = 0; j < keys.size(); ++j)
    if (forest.importances[j] > 0.0) out.emplace_back(keys[j], forest.importances[j]);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

}  // namespace radpipe
