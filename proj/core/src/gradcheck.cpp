#include "radpipe/gradcheck.hpp"

#include <cmath>

namespace radpipe {

GradCheckReport grad_check(const std::function<double(bool)>& loss,
                           std::span<Param* const> params, const GradCheckOptions& opts) {
  for (Param* p : params) p->zero_grad();
  loss(true);
  std::vector<Mat> analytic;
  analytic.reserve(params.size());
  for (Param* p : params) analytic.push_back(p->grad);

  Rng rng(opts.seed);
  GradCheckReport report;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Param* p = params[pi];
    const int total = static_cast<int>(p->value.size());
    std::vector<int> coords;
    if (total <= opts.samples_per_param) {
      for (int i = 0; i < total; ++i) coords.push_back(i);
    } else {
      coords = rng.sample_indices(total, opts.samples_per_param);
    }

    GradCheckEntry entry;
    entry.param = p->name;
    entry.coords_checked = static_cast<int>(coords.size());
    for (int c : coords) {
      const double saved = p->value.a[c];
      p->value.a[c] = saved + opts.eps;
      const double lp = loss(false);
      p->value.a[c] = saved - opts.eps;
      const double lm = loss(false);
      p->value.a[c] = saved;
      const double numeric = (lp - lm) / (2.0 * opts.eps);
      const double a = analytic[pi].a[c];
      const double rel = std::fabs(a - numeric) / std::max(1e-8, std::fabs(a) + std::fabs(numeric));
      entry.max_rel_err = std::max(entry.max_rel_err, rel);
    }
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.entries.push_back(std::move(entry));
  }
  for (Param* p : params) p->zero_grad();
  return report;
}

}  // namespace radpipe
