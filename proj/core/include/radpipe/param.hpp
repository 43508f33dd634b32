#pragma once

#include <span>
#include <string>

#include "radpipe/mat.hpp"
#include "radpipe/rng.hpp"

namespace radpipe {

/// A named trainable tensor with its gradient and Adam moments.
struct Param {
  std::string name;
  Mat value;
  Mat grad;
  Mat adam_m;
  Mat adam_v;
  long step = 0;

  Param() = default;
  Param(std::string n, int rows, int cols)
      : name(std::move(n)), value(rows, cols), grad(rows, cols), adam_m(rows, cols), adam_v(rows, cols) {}

  void zero_grad() { grad.fill(0.0); }

  /// Glorot uniform: U(-r, r), r = sqrt(6 / (fan_in + fan_out)).
  void init_glorot(Rng& rng) {
    const double r = std::sqrt(6.0 / (value.rows + value.cols));
    for (double& v : value.a) v = rng.uniform(-r, r);
  }
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam update over all listed parameters. Increments each
/// step counter and zeroes gradients afterwards. Throws std::runtime_error
/// naming the parameter if a gradient entry is not finite.
void adam_step(std::span<Param* const> params, const AdamConfig& cfg);

}  // namespace radpipe
