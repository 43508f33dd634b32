#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "radpipe/param.hpp"

namespace radpipe {

struct GradCheckEntry {
  std::string param;
  double max_rel_err = 0.0;
  int coords_checked = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_err = 0.0;

  bool ok(double tol) const { return max_rel_err <= tol; }
};

struct GradCheckOptions {
  double eps = 1e-5;
  int samples_per_param = 20;  // all coordinates when the param is smaller
  uint64_t seed = 0;
};

/// Central finite differences against the analytic gradient on randomly
/// sampled coordinates. `loss(with_grad)` must return the loss and, when
/// with_grad is set, accumulate gradients into the (pre-zeroed) params.
/// Relative error = |a - n| / max(1e-8, |a| + |n|).
GradCheckReport grad_check(const std::function<double(bool)>& loss,
                           std::span<Param* const> params,
                           const GradCheckOptions& opts = {});

}  // namespace radpipe
