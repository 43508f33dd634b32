#include "radpipe/linear.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "radpipe/rng.hpp"
#include "radpipe/serialize.hpp"

namespace radpipe {

namespace {

void check_xy(const BinaryRows& x, const std::vector<int>& y, bool need_both_classes) {
  if (x.empty()) throw std::invalid_argument("fit: empty data");
  if (x.size() != y.size()) throw std::invalid_argument("fit: row/label count mismatch");
  const size_t p = x[0].size();
  for (const auto& row : x)
    if (row.size() != p) throw std::invalid_argument("fit: ragged rows");
  if (need_both_classes) {
    bool has0 = false, has1 = false;
    for (int v : y) (v == 1 ? has1 : has0) = true;
    if (!has0 || !has1) throw std::invalid_argument("fit: both classes must be present");
  }
}

/// margins[i] = w . x_i + b
void compute_margins(const BinaryRows& x, const Vec& w, double b, Vec& out) {
  out.resize(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double s = b;
    const auto& row = x[i];
    for (size_t j = 0; j < row.size(); ++j)
      if (row[j]) s += w[j];
    out[i] = s;
  }
}

/// Mean logistic loss given margins; y in {0,1}.
double loss_from_margins(const Vec& margins, const std::vector<int>& y) {
  double s = 0.0;
  for (size_t i = 0; i < margins.size(); ++i)
    s += log1pexp(margins[i]) - (y[i] ? margins[i] : 0.0);
  return s / static_cast<double>(margins.size());
}

/// grad_w = X^T (sigma(m) - y) / n, grad_b = mean(sigma(m) - y)
void logistic_gradient(const BinaryRows& x, const std::vector<int>& y, const Vec& margins,
                       Vec& gw, double& gb) {
  const size_t n = x.size(), p = x[0].size();
  gw.assign(p, 0.0);
  gb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = sigmoid(margins[i]) - (y[i] ? 1.0 : 0.0);
    gb += r;
    const auto& row = x[i];
    for (size_t j = 0; j < p; ++j)
      if (row[j]) gw[j] += r;
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (double& v : gw) v *= inv;
  gb *= inv;
}

double intercept_at_base_rate(const std::vector<int>& y) {
  double mean = 0.0;
  for (int v : y) mean += v;
  mean /= static_cast<double>(y.size());
  const double p = std::clamp(mean, 1e-12, 1.0 - 1e-12);
  return std::log(p / (1.0 - p));
}

}  // namespace

double lasso_lambda_max(const BinaryRows& x, const std::vector<int>& y) {
  check_xy(x, y, true);
  const double b = intercept_at_base_rate(y);
  Vec margins(x.size(), b), gw;
  double gb;
  logistic_gradient(x, y, margins, gw, gb);
  double m = 0.0;
  for (double g : gw) m = std::max(m, std::fabs(g));
  return m;
}

LinearModel fit_lasso(const BinaryRows& x, const std::vector<int>& y, double lambda) {
  check_xy(x, y, true);
  if (lambda < 0) throw std::invalid_argument("fit_lasso: lambda must be >= 0");
  const size_t p = x[0].size();

  LinearModel m;
  m.kind = LinearKind::Lasso;
  m.w.assign(p, 0.0);
  m.b = intercept_at_base_rate(y);  // keeps w = 0 an exact fixed point when lambda >= lambda_max

  Vec margins, gw, wn(p), cand_margins;
  double gb = 0.0;
  compute_margins(x, m.w, m.b, margins);
  double f = loss_from_margins(margins, y);
  double step = 1.0;

  for (int iter = 0; iter < 10000; ++iter) {
    logistic_gradient(x, y, margins, gw, gb);

    double bn = 0.0, fn = 0.0, max_change = 0.0;
    while (true) {
      // Proximal step: soft-threshold the coefficients, plain step for b.
      for (size_t j = 0; j < p; ++j) {
        const double u = m.w[j] - step * gw[j];
        const double thr = step * lambda;
        wn[j] = u > thr ? u - thr : (u < -thr ? u + thr : 0.0);
      }
      bn = m.b - step * gb;

      compute_margins(x, wn, bn, cand_margins);
      fn = loss_from_margins(cand_margins, y);
      double quad = 0.0, lin = 0.0;
      for (size_t j = 0; j < p; ++j) {
        const double d = wn[j] - m.w[j];
        lin += gw[j] * d;
        quad += d * d;
      }
      const double db = bn - m.b;
      lin += gb * db;
      quad += db * db;
      if (fn <= f + lin + quad / (2.0 * step) + 1e-15) break;
      step *= 0.5;
      if (step < 1e-12) break;
    }

    for (size_t j = 0; j < p; ++j) max_change = std::max(max_change, std::fabs(wn[j] - m.w[j]));
    max_change = std::max(max_change, std::fabs(bn - m.b));

    m.w = wn;
    m.b = bn;
    margins = cand_margins;
    f = fn;
    if (max_change < 1e-7) break;
    step *= 1.25;  // recover from conservative backtracked steps
  }
  return m;
}

double lasso_kkt_residual(const BinaryRows& x, const std::vector<int>& y, double lambda,
                          const LinearModel& m) {
  Vec margins, gw;
  double gb;
  compute_margins(x, m.w, m.b, margins);
  logistic_gradient(x, y, margins, gw, gb);
  double worst = std::fabs(gb);  // intercept is unpenalized: gradient must vanish
  for (size_t j = 0; j < m.w.size(); ++j) {
    if (m.w[j] == 0.0)
      worst = std::max(worst, std::max(0.0, std::fabs(gw[j]) - lambda));
    else
      worst = std::max(worst, std::fabs(gw[j] + lambda * (m.w[j] > 0 ? 1.0 : -1.0)));
  }
  return worst;
}

std::vector<int> select_features(const LinearModel& m) {
  std::vector<int> out;
  for (size_t j = 0; j < m.w.size(); ++j)
    if (std::fabs(m.w[j]) > 1e-10) out.push_back(static_cast<int>(j));
  return out;
}

LinearModel fit_logistic(const BinaryRows& x, const std::vector<int>& y, double l2) {
  check_xy(x, y, false);
  const size_t p = x[0].size();

  LinearModel m;
  m.kind = LinearKind::Logistic;
  m.w.assign(p, 0.0);
  m.b = 0.0;

  Vec margins, gw, wn(p), cand_margins;
  double gb = 0.0;
  compute_margins(x, m.w, m.b, margins);
  auto objective = [&](const Vec& w, const Vec& marg) {
    double reg = 0.0;
    for (double v : w) reg += v * v;
    return loss_from_margins(marg, y) + 0.5 * l2 * reg;
  };
  double f = objective(m.w, margins);
  double step = 1.0;

  for (int iter = 0; iter < 200000; ++iter) {
    logistic_gradient(x, y, margins, gw, gb);
    for (size_t j = 0; j < p; ++j) gw[j] += l2 * m.w[j];

    double gnorm2 = gb * gb;
    for (double g : gw) gnorm2 += g * g;
    if (std::sqrt(gnorm2) < 1e-6) break;

    double bn = 0.0, fn = 0.0;
    while (true) {
      for (size_t j = 0; j < p; ++j) wn[j] = m.w[j] - step * gw[j];
      bn = m.b - step * gb;
      compute_margins(x, wn, bn, cand_margins);
      fn = objective(wn, cand_margins);
      if (fn <= f - 0.5 * step * gnorm2 + 1e-15) break;  // Armijo
      step *= 0.5;
      if (step < 1e-14) break;
    }
    if (step < 1e-14) break;
    m.w = wn;
    m.b = bn;
    margins = cand_margins;
    f = fn;
    step *= 1.25;
  }
  return m;
}

double logistic_loss(const BinaryRows& x, const std::vector<int>& y, const LinearModel& m) {
  Vec margins;
  compute_margins(x, m.w, m.b, margins);
  return loss_from_margins(margins, y);
}

LinearModel fit_svm(const BinaryRows& x, const std::vector<int>& y, double lambda, int epochs,
                    uint64_t seed) {
  check_xy(x, y, true);
  if (lambda <= 0) throw std::invalid_argument("fit_svm: lambda must be > 0");
  const size_t n = x.size(), p = x[0].size();

  Vec w(p, 0.0);
  double b = 0.0;
  Vec w_sum(p, 0.0);
  double b_sum = 0.0;
  long averaged = 0;
  const int avg_from = epochs / 2 + 1;  // average the iterates of the second half

  Rng rng(seed);
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;

  long t = 0;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double yi = y[i] ? 1.0 : -1.0;
      double margin = b;
      const auto& row = x[i];
      for (size_t j = 0; j < p; ++j)
        if (row[j]) margin += w[j];
      const double decay = 1.0 - eta * lambda;  // = 1 - 1/t
      for (double& v : w) v *= decay;
      if (yi * margin < 1.0) {
        for (size_t j = 0; j < p; ++j)
          if (row[j]) w[j] += eta * yi;
        b += eta * yi;
      }
      if (epoch >= avg_from) {
        for (size_t j = 0; j < p; ++j) w_sum[j] += w[j];
        b_sum += b;
        ++averaged;
      }
    }
  }

  LinearModel m;
  m.kind = LinearKind::Svm;
  if (averaged > 0) {
    m.w.resize(p);
    for (size_t j = 0; j < p; ++j) m.w[j] = w_sum[j] / static_cast<double>(averaged);
    m.b = b_sum / static_cast<double>(averaged);
  } else {
    m.w = w;
    m.b = b;
  }
  return m;
}

double svm_objective(const BinaryRows& x, const std::vector<int>& y, double lambda,
                     const LinearModel& m) {
  double reg = 0.0;
  for (double v : m.w) reg += v * v;
  double hinge = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double yi = y[i] ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - yi * predict_margin(m, x[i]));
  }
  return 0.5 * lambda * reg + hinge / static_cast<double>(x.size());
}

double predict_margin(const LinearModel& m, std::span<const uint8_t> row) {
  double s = m.b;
  for (size_t j = 0; j < row.size(); ++j)
    if (row[j]) s += m.w[j];
  return s;
}

Vec predict_score(const LinearModel& m, const BinaryRows& x) {
  Vec out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = predict_margin(m, x[i]);
  return out;
}

std::vector<int> predict(const LinearModel& m, const BinaryRows& x) {
  std::vector<int> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = predict_margin(m, x[i]) > 0.0 ? 1 : 0;
  return out;
}

const char* to_string(LinearKind k) {
  switch (k) {
    case LinearKind::Lasso: return "lasso";
    case LinearKind::Logistic: return "logistic";
    case LinearKind::Svm: return "svm";
  }
  return "?";
}

namespace {
LinearKind kind_from_string(const std::string& s, const std::string& where) {
  if (s == "lasso") return LinearKind::Lasso;
  if (s == "logistic") return LinearKind::Logistic;
  if (s == "svm") return LinearKind::Svm;
  throw std::runtime_error(where + ": unknown linear model kind '" + s + "'");
}
}  // namespace

void LinearModel::save(std::ostream& os) const {
  TextWriter tw(os);
  tw.word("radpipe-linear").word("v1").nl();
  tw.word("kind").word(to_string(kind)).nl();
  tw.vec("w", w);
  tw.word("b").num(b).nl();
  tw.word("end").nl();
}

void LinearModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  save(out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

LinearModel LinearModel::load(std::istream& is, const std::string& name) {
  TextReader r(is, name);
  r.expect("radpipe-linear");
  r.expect("v1");
  r.expect("kind");
  LinearModel m;
  m.kind = kind_from_string(r.next(), name);
  m.w = r.next_vec("w");
  r.expect("b");
  m.b = r.next_double();
  r.expect("end");
  return m;
}

LinearModel LinearModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  return load(in, path);
}

}  // namespace radpipe
