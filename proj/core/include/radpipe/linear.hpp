#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "radpipe/mat.hpp"

namespace radpipe {

using BinaryRows = std::vector<std::vector<uint8_t>>;

enum class LinearKind { Lasso, Logistic, Svm };

const char* to_string(LinearKind k);

struct LinearModel {
  LinearKind kind = LinearKind::Logistic;
  Vec w;
  double b = 0.0;

  void save(std::ostream& os) const;
  void save(const std::string& path) const;
  static LinearModel load(std::istream& is, const std::string& name);
  static LinearModel load(const std::string& path);
};

/// Smallest penalty that zeroes every coefficient: max_j |grad_j| of the
/// smooth loss at w = 0 with the intercept at its optimum.
double lasso_lambda_max(const BinaryRows& x, const std::vector<int>& y);

/// Minimizes (1/n) sum logistic loss + lambda * ||w||_1, intercept
/// unpenalized, by proximal gradient with backtracking line search.
/// Converged when the largest coordinate change drops below 1e-7 (or
/// 10000 iterations). Throws when y holds a single class.
LinearModel fit_lasso(const BinaryRows& x, const std::vector<int>& y, double lambda);

/// Max KKT stationarity violation at the solution (0 at an exact optimum).
double lasso_kkt_residual(const BinaryRows& x, const std::vector<int>& y, double lambda,
                          const LinearModel& m);

/// Indices with |w_j| > 1e-10, ascending.
std::vector<int> select_features(const LinearModel& m);

/// Minimizes mean logistic loss + l2 * ||w||^2 / 2 (intercept unpenalized)
/// by full-batch gradient descent with backtracking; stops when the
/// gradient norm falls below 1e-6.
LinearModel fit_logistic(const BinaryRows& x, const std::vector<int>& y, double l2 = 1e-4);

/// Mean logistic loss of a linear model (no penalty).
double logistic_loss(const BinaryRows& x, const std::vector<int>& y, const LinearModel& m);

/// Pegasos: seeded stochastic subgradient descent with step 1/(lambda*t)
/// on lambda * ||w||^2 / 2 + mean hinge loss; the returned weights average
/// the iterates of the second half of training.
LinearModel fit_svm(const BinaryRows& x, const std::vector<int>& y, double lambda = 1e-2,
                    int epochs = 200, uint64_t seed = 0);

/// lambda * ||w||^2 / 2 + mean hinge loss with y in {0,1} mapped to +-1.
double svm_objective(const BinaryRows& x, const std::vector<int>& y, double lambda,
                     const LinearModel& m);

double predict_margin(const LinearModel& m, std::span<const uint8_t> row);
Vec predict_score(const LinearModel& m, const BinaryRows& x);
/// Class 1 iff margin > 0; a zero margin maps to class 0.
std::vector<int> predict(const LinearModel& m, const BinaryRows& x);

}  // namespace radpipe
