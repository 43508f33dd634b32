#include "radpipe/crf.hpp"

#include <limits>
#include <stdexcept>

#include "radpipe/tagging.hpp"

namespace radpipe {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_emissions(const CrfParams& crf, const Mat& emissions) {
  if (emissions.rows < 1) throw std::invalid_argument("crf: empty sequence");
  if (emissions.cols != crf.tags) throw std::invalid_argument("crf: emission width != tag count");
}

/// alpha(t, j) = log sum over paths ending in tag j at position t.
Mat forward_scores(const CrfParams& crf, const Mat& em) {
  const int n = em.rows, T = em.cols;
  Mat alpha(n, T);
  for (int j = 0; j < T; ++j) alpha(0, j) = crf.start.value.a[j] + em(0, j);
  std::vector<double> acc(T);
  for (int t = 1; t < n; ++t) {
    for (int j = 0; j < T; ++j) {
      for (int i = 0; i < T; ++i) acc[i] = alpha(t - 1, i) + crf.transitions.value(i, j);
      alpha(t, j) = logsumexp(acc.data(), T) + em(t, j);
    }
  }
  return alpha;
}

/// beta(t, i) = log sum over path suffixes starting after tag i at position t.
Mat backward_scores(const CrfParams& crf, const Mat& em) {
  const int n = em.rows, T = em.cols;
  Mat beta(n, T);
  for (int i = 0; i < T; ++i) beta(n - 1, i) = crf.end.value.a[i];
  std::vector<double> acc(T);
  for (int t = n - 2; t >= 0; --t) {
    for (int i = 0; i < T; ++i) {
      for (int j = 0; j < T; ++j)
        acc[j] = crf.transitions.value(i, j) + em(t + 1, j) + beta(t + 1, j);
      beta(t, i) = logsumexp(acc.data(), T);
    }
  }
  return beta;
}

}  // namespace

CrfMask CrfMask::all_allowed(int tags) {
  CrfMask m;
  m.tags = tags;
  m.start_ok.assign(tags, 1);
  m.end_ok.assign(tags, 1);
  m.trans_ok.assign(static_cast<size_t>(tags) * tags, 1);
  return m;
}

double crf_log_partition(const CrfParams& crf, const Mat& emissions) {
  check_emissions(crf, emissions);
  const Mat alpha = forward_scores(crf, emissions);
  const int n = emissions.rows, T = emissions.cols;
  std::vector<double> fin(T);
  for (int j = 0; j < T; ++j) fin[j] = alpha(n - 1, j) + crf.end.value.a[j];
  return logsumexp(fin.data(), T);
}

Mat crf_marginals(const CrfParams& crf, const Mat& emissions) {
  check_emissions(crf, emissions);
  const Mat alpha = forward_scores(crf, emissions);
  const Mat beta = backward_scores(crf, emissions);
  const int n = emissions.rows, T = emissions.cols;
  std::vector<double> fin(T);
  for (int j = 0; j < T; ++j) fin[j] = alpha(n - 1, j) + crf.end.value.a[j];
  const double log_z = logsumexp(fin.data(), T);

  Mat mu(n, T);
  for (int t = 0; t < n; ++t)
    for (int j = 0; j < T; ++j) mu(t, j) = std::exp(alpha(t, j) + beta(t, j) - log_z);
  return mu;
}

double crf_nll(CrfParams& crf, const Mat& emissions, std::span<const int> gold,
               Mat* d_emissions, double scale) {
  check_emissions(crf, emissions);
  const int n = emissions.rows, T = emissions.cols;
  if (static_cast<int>(gold.size()) != n)
    throw std::invalid_argument("crf_nll: gold length mismatch");
  for (int y : gold)
    if (y < 0 || y >= T) throw std::invalid_argument("crf_nll: gold tag id out of range");

  const Mat alpha = forward_scores(crf, emissions);
  const Mat beta = backward_scores(crf, emissions);
  std::vector<double> fin(T);
  for (int j = 0; j < T; ++j) fin[j] = alpha(n - 1, j) + crf.end.value.a[j];
  const double log_z = logsumexp(fin.data(), T);

  double gold_score = crf.start.value.a[gold[0]] + emissions(0, gold[0]);
  for (int t = 1; t < n; ++t)
    gold_score += crf.transitions.value(gold[t - 1], gold[t]) + emissions(t, gold[t]);
  gold_score += crf.end.value.a[gold[n - 1]];

  const double loss = log_z - gold_score;

  if (d_emissions != nullptr) {
    if (!d_emissions->same_shape(emissions))
      throw std::invalid_argument("crf_nll: d_emissions shape mismatch");
    // d logZ / d emission = unary marginal; d gold_score = one-hot.
    for (int t = 0; t < n; ++t) {
      for (int j = 0; j < T; ++j) {
        const double mu = std::exp(alpha(t, j) + beta(t, j) - log_z);
        (*d_emissions)(t, j) += scale * mu;
      }
      (*d_emissions)(t, gold[t]) -= scale;
    }
    for (int j = 0; j < T; ++j) {
      const double mu0 = std::exp(alpha(0, j) + beta(0, j) - log_z);
      crf.start.grad.a[j] += scale * mu0;
      const double mun = std::exp(alpha(n - 1, j) + beta(n - 1, j) - log_z);
      crf.end.grad.a[j] += scale * mun;
    }
    crf.start.grad.a[gold[0]] -= scale;
    crf.end.grad.a[gold[n - 1]] -= scale;
    // Pairwise marginals for the transition gradient.
    for (int t = 0; t + 1 < n; ++t) {
      for (int i = 0; i < T; ++i) {
        const double a = alpha(t, i);
        for (int j = 0; j < T; ++j) {
          const double xi = std::exp(a + crf.transitions.value(i, j) + emissions(t + 1, j) +
                                     beta(t + 1, j) - log_z);
          crf.transitions.grad(i, j) += scale * xi;
        }
      }
      crf.transitions.grad(gold[t], gold[t + 1]) -= scale;
    }
  }
  return loss;
}

std::vector<int> crf_viterbi(const CrfParams& crf, const Mat& emissions, const CrfMask* mask) {
  check_emissions(crf, emissions);
  const int n = emissions.rows, T = emissions.cols;
  if (mask != nullptr && mask->tags != T)
    throw std::invalid_argument("crf_viterbi: mask size mismatch");

  auto start_ok = [&](int j) { return mask == nullptr || mask->start_ok[j]; };
  auto end_ok = [&](int j) { return mask == nullptr || mask->end_ok[j]; };
  auto trans_ok = [&](int i, int j) {
    return mask == nullptr || mask->trans_ok[static_cast<size_t>(i) * T + j];
  };

  Mat score(n, T);
  std::vector<int> back(static_cast<size_t>(n) * T, -1);
  for (int j = 0; j < T; ++j)
    score(0, j) = start_ok(j) ? crf.start.value.a[j] + emissions(0, j) : kNegInf;

  for (int t = 1; t < n; ++t) {
    for (int j = 0; j < T; ++j) {
      double best = kNegInf;
      int best_i = -1;
      for (int i = 0; i < T; ++i) {
        if (!trans_ok(i, j) || score(t - 1, i) == kNegInf) continue;
        const double s = score(t - 1, i) + crf.transitions.value(i, j);
        if (s > best) {  // strict: ties keep the lower i
          best = s;
          best_i = i;
        }
      }
      score(t, j) = best == kNegInf ? kNegInf : best + emissions(t, j);
      back[static_cast<size_t>(t) * T + j] = best_i;
    }
  }

  double best = kNegInf;
  int best_j = -1;
  for (int j = 0; j < T; ++j) {
    if (!end_ok(j) || score(n - 1, j) == kNegInf) continue;
    const double s = score(n - 1, j) + crf.end.value.a[j];
    if (s > best) {
      best = s;
      best_j = j;
    }
  }
  if (best_j < 0) throw std::runtime_error("crf_viterbi: all paths forbidden");

  std::vector<int> path(n);
  path[n - 1] = best_j;
  for (int t = n - 1; t > 0; --t) path[t - 1] = back[static_cast<size_t>(t) * T + path[t]];
  return path;
}

const CrfMask& bieos_mask() {
  static const CrfMask mask = [] {
    CrfMask m;
    const int T = BieosTag::kCount;
    m.tags = T;
    m.start_ok.resize(T);
    m.end_ok.resize(T);
    m.trans_ok.resize(static_cast<size_t>(T) * T);
    for (int i = 0; i < T; ++i) {
      m.start_ok[i] = is_valid_start(BieosTag::from_id(i)) ? 1 : 0;
      m.end_ok[i] = is_valid_end(BieosTag::from_id(i)) ? 1 : 0;
      for (int j = 0; j < T; ++j)
        m.trans_ok[static_cast<size_t>(i) * T + j] =
            is_valid_transition(BieosTag::from_id(i), BieosTag::from_id(j)) ? 1 : 0;
    }
    return m;
  }();
  return mask;
}

}  // namespace radpipe
