#pragma once

#include <string>
#include <vector>

#include "radpipe/param.hpp"

namespace radpipe {

/// One LSTM cell. W, U stack the four gates row-wise in the fixed order
/// input, forget, cell, output (rows [0,H), [H,2H), [2H,3H), [3H,4H)).
struct LstmCellParams {
  Param W;  // 4H x D
  Param U;  // 4H x H
  Param b;  // 4H x 1
  int hidden = 0;
  int input = 0;

  LstmCellParams() = default;
  LstmCellParams(const std::string& prefix, int hidden_size, int input_size);

  /// Glorot for W and U, zero bias except forget gate bias = 1.
  void init(Rng& rng);

  std::vector<Param*> params() { return {&W, &U, &b}; }
};

/// Activations retained for exact backpropagation through time.
struct LstmCache {
  int steps = 0;
  std::vector<Vec> x, gi, gf, gg, go, c, tanh_c;
  std::vector<Vec> h;  // h[t] for t in [0, steps); h_prev(t) = t ? h[t-1] : h0
  Vec h0, c0;
};

/// Standard LSTM recurrence over the input sequence; returns h_t per step.
/// Pass a cache to retain activations for lstm_backward.
std::vector<Vec> lstm_forward(const LstmCellParams& p, const std::vector<Vec>& inputs,
                              const Vec& h0, const Vec& c0, LstmCache* cache = nullptr);

/// Backward through time. d_outputs holds dL/dh_t; parameter gradients are
/// accumulated into p and dL/dx_t is returned.
std::vector<Vec> lstm_backward(LstmCellParams& p, const LstmCache& cache,
                               const std::vector<Vec>& d_outputs);

struct BiLstmCache {
  LstmCache fwd, bwd;
};

/// Forward pass left-to-right plus a pass over the reversed sequence,
/// concatenated per position (forward half first): output size 2H.
std::vector<Vec> bilstm_forward(const LstmCellParams& fwd, const LstmCellParams& bwd,
                                const std::vector<Vec>& inputs, BiLstmCache* cache = nullptr);

std::vector<Vec> bilstm_backward(LstmCellParams& fwd, LstmCellParams& bwd,
                                 const BiLstmCache& cache, const std::vector<Vec>& d_outputs);

}  // namespace radpipe
