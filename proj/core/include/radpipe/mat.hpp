#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace radpipe {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles. Vectors are stored as n x 1.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

  double* row(int r) { return a.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const { return a.data() + static_cast<size_t>(r) * cols; }

  size_t size() const { return a.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
  void fill(double v) { std::fill(a.begin(), a.end(), v); }
};

/// y = M x (y resized to m.rows)
inline void matvec(const Mat& m, const Vec& x, Vec& y) {
  if (static_cast<int>(x.size()) != m.cols) throw std::invalid_argument("matvec: dimension mismatch");
  y.assign(m.rows, 0.0);
  for (int r = 0; r < m.rows; ++r) {
    const double* mr = m.row(r);
    double s = 0.0;
    for (int c = 0; c < m.cols; ++c) s += mr[c] * x[c];
    y[r] = s;
  }
}

/// y += M x
inline void matvec_add(const Mat& m, const Vec& x, Vec& y) {
  if (static_cast<int>(x.size()) != m.cols || static_cast<int>(y.size()) != m.rows)
    throw std::invalid_argument("matvec_add: dimension mismatch");
  for (int r = 0; r < m.rows; ++r) {
    const double* mr = m.row(r);
    double s = 0.0;
    for (int c = 0; c < m.cols; ++c) s += mr[c] * x[c];
    y[r] += s;
  }
}

/// y = M^T x (y resized to m.cols)
inline void matvec_t(const Mat& m, const Vec& x, Vec& y) {
  if (static_cast<int>(x.size()) != m.rows) throw std::invalid_argument("matvec_t: dimension mismatch");
  y.assign(m.cols, 0.0);
  for (int r = 0; r < m.rows; ++r) {
    const double* mr = m.row(r);
    const double xr = x[r];
    for (int c = 0; c < m.cols; ++c) y[c] += mr[c] * xr;
  }
}

/// G += u v^T
inline void add_outer(Mat& g, const Vec& u, const Vec& v) {
  if (static_cast<int>(u.size()) != g.rows || static_cast<int>(v.size()) != g.cols)
    throw std::invalid_argument("add_outer: dimension mismatch");
  for (int r = 0; r < g.rows; ++r) {
    double* gr = g.row(r);
    const double ur = u[r];
    for (int c = 0; c < g.cols; ++c) gr[c] += ur * v[c];
  }
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// y += a x
inline void axpy(double a, const Vec& x, Vec& y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

/// Overflow-safe log(sum(exp(v))).
inline double logsumexp(const double* v, int n) {
  double m = v[0];
  for (int i = 1; i < n; ++i) m = std::max(m, v[i]);
  if (!std::isfinite(m)) return m;  // all -inf stays -inf
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

inline bool all_finite(const Mat& m) {
  for (double v : m.a)
    if (!std::isfinite(v)) return false;
  return true;
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(1 + exp(x)) without overflow.
inline double log1pexp(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace radpipe
