#include "radpipe/param.hpp"

#include <cmath>
#include <stdexcept>

namespace radpipe {

void adam_step(std::span<Param* const> params, const AdamConfig& cfg) {
  for (Param* p : params) {
    for (double g : p->grad.a) {
      if (!std::isfinite(g))
        throw std::runtime_error("adam_step: non-finite gradient in parameter '" + p->name + "'");
    }
    p->step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p->step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p->step));
    for (size_t i = 0; i < p->value.a.size(); ++i) {
      const double g = p->grad.a[i];
      p->adam_m.a[i] = cfg.beta1 * p->adam_m.a[i] + (1.0 - cfg.beta1) * g;
      p->adam_v.a[i] = cfg.beta2 * p->adam_v.a[i] + (1.0 - cfg.beta2) * g * g;
      const double mhat = p->adam_m.a[i] / bc1;
      const double vhat = p->adam_v.a[i] / bc2;
      p->value.a[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
    p->zero_grad();
  }
}

}  // namespace radpipe
