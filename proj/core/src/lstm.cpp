#include "radpipe/lstm.hpp"

#include <algorithm>
#include <stdexcept>

namespace radpipe {

LstmCellParams::LstmCellParams(const std::string& prefix, int hidden_size, int input_size)
    : W(prefix + ".W", 4 * hidden_size, input_size),
      U(prefix + ".U", 4 * hidden_size, hidden_size),
      b(prefix + ".b", 4 * hidden_size, 1),
      hidden(hidden_size),
      input(input_size) {}

void LstmCellParams::init(Rng& rng) {
  W.init_glorot(rng);
  U.init_glorot(rng);
  b.value.fill(0.0);
  for (int i = hidden; i < 2 * hidden; ++i) b.value.a[i] = 1.0;  // forget gate
}

std::vector<Vec> lstm_forward(const LstmCellParams& p, const std::vector<Vec>& inputs,
                              const Vec& h0, const Vec& c0, LstmCache* cache) {
  const int H = p.hidden;
  if (static_cast<int>(h0.size()) != H || static_cast<int>(c0.size()) != H)
    throw std::invalid_argument("lstm_forward: state size mismatch");
  const int n = static_cast<int>(inputs.size());
  std::vector<Vec> outputs(n);
  if (cache) {
    cache->steps = n;
    cache->x = inputs;
    cache->gi.assign(n, {});
    cache->gf.assign(n, {});
    cache->gg.assign(n, {});
    cache->go.assign(n, {});
    cache->c.assign(n, {});
    cache->tanh_c.assign(n, {});
    cache->h.assign(n, {});
    cache->h0 = h0;
    cache->c0 = c0;
  }

  Vec h = h0, c = c0;
  Vec z(4 * H);
  for (int t = 0; t < n; ++t) {
    if (static_cast<int>(inputs[t].size()) != p.input)
      throw std::invalid_argument("lstm_forward: input size mismatch at step " + std::to_string(t));
    for (int i = 0; i < 4 * H; ++i) z[i] = p.b.value.a[i];
    matvec_add(p.W.value, inputs[t], z);
    matvec_add(p.U.value, h, z);

    Vec gi(H), gf(H), gg(H), go(H), cn(H), tc(H), hn(H);
    for (int i = 0; i < H; ++i) {
      gi[i] = sigmoid(z[i]);
      gf[i] = sigmoid(z[H + i]);
      gg[i] = std::tanh(z[2 * H + i]);
      go[i] = sigmoid(z[3 * H + i]);
      cn[i] = gf[i] * c[i] + gi[i] * gg[i];
      tc[i] = std::tanh(cn[i]);
      hn[i] = go[i] * tc[i];
    }
    if (cache) {
      cache->gi[t] = gi;
      cache->gf[t] = gf;
      cache->gg[t] = gg;
      cache->go[t] = go;
      cache->c[t] = cn;
      cache->tanh_c[t] = tc;
      cache->h[t] = hn;
    }
    h = std::move(hn);
    c = std::move(cn);
    outputs[t] = h;
  }
  return outputs;
}

std::vector<Vec> lstm_backward(LstmCellParams& p, const LstmCache& cache,
                               const std::vector<Vec>& d_outputs) {
  const int H = p.hidden;
  const int n = cache.steps;
  if (static_cast<int>(d_outputs.size()) != n)
    throw std::invalid_argument("lstm_backward: output gradient count mismatch");

  std::vector<Vec> d_inputs(n, Vec(p.input, 0.0));
  Vec dh_next(H, 0.0), dc_next(H, 0.0);
  Vec dz(4 * H), tmp;

  for (int t = n - 1; t >= 0; --t) {
    const Vec& gi = cache.gi[t];
    const Vec& gf = cache.gf[t];
    const Vec& gg = cache.gg[t];
    const Vec& go = cache.go[t];
    const Vec& tc = cache.tanh_c[t];
    const Vec& c_prev = t > 0 ? cache.c[t - 1] : cache.c0;

    for (int i = 0; i < H; ++i) {
      const double dh = d_outputs[t][i] + dh_next[i];
      const double dgo = dh * tc[i];
      const double dc = dh * go[i] * (1.0 - tc[i] * tc[i]) + dc_next[i];
      const double dgf = dc * c_prev[i];
      const double dgi = dc * gg[i];
      const double dgg = dc * gi[i];
      dc_next[i] = dc * gf[i];
      dz[i] = dgi * gi[i] * (1.0 - gi[i]);
      dz[H + i] = dgf * gf[i] * (1.0 - gf[i]);
      dz[2 * H + i] = dgg * (1.0 - gg[i] * gg[i]);
      dz[3 * H + i] = dgo * go[i] * (1.0 - go[i]);
    }

    const Vec& h_prev = t > 0 ? cache.h[t - 1] : cache.h0;
    add_outer(p.W.grad, dz, cache.x[t]);
    add_outer(p.U.grad, dz, h_prev);
    for (int i = 0; i < 4 * H; ++i) p.b.grad.a[i] += dz[i];

    matvec_t(p.W.value, dz, d_inputs[t]);
    matvec_t(p.U.value, dz, tmp);
    dh_next = tmp;
  }
  return d_inputs;
}

std::vector<Vec> bilstm_forward(const LstmCellParams& fwd, const LstmCellParams& bwd,
                                const std::vector<Vec>& inputs, BiLstmCache* cache) {
  const int n = static_cast<int>(inputs.size());
  const Vec zero_f(fwd.hidden, 0.0), zero_b(bwd.hidden, 0.0);

  const std::vector<Vec> out_f =
      lstm_forward(fwd, inputs, zero_f, zero_f, cache ? &cache->fwd : nullptr);

  std::vector<Vec> rev(inputs.rbegin(), inputs.rend());
  const std::vector<Vec> out_b =
      lstm_forward(bwd, rev, zero_b, zero_b, cache ? &cache->bwd : nullptr);

  std::vector<Vec> out(n);
  for (int t = 0; t < n; ++t) {
    out[t].reserve(fwd.hidden + bwd.hidden);
    out[t] = out_f[t];
    const Vec& back = out_b[n - 1 - t];
    out[t].insert(out[t].end(), back.begin(), back.end());
  }
  return out;
}

std::vector<Vec> bilstm_backward(LstmCellParams& fwd, LstmCellParams& bwd,
                                 const BiLstmCache& cache, const std::vector<Vec>& d_outputs) {
  const int n = static_cast<int>(d_outputs.size());
  const int Hf = fwd.hidden, Hb = bwd.hidden;

  std::vector<Vec> d_fwd(n), d_bwd(n);
  for (int t = 0; t < n; ++t) {
    d_fwd[t].assign(d_outputs[t].begin(), d_outputs[t].begin() + Hf);
    d_bwd[n - 1 - t].assign(d_outputs[t].begin() + Hf, d_outputs[t].begin() + Hf + Hb);
  }

  const std::vector<Vec> dx_f = lstm_backward(fwd, cache.fwd, d_fwd);
  const std::vector<Vec> dx_b = lstm_backward(bwd, cache.bwd, d_bwd);

  std::vector<Vec> d_inputs(n);
  for (int t = 0; t < n; ++t) {
    d_inputs[t] = dx_f[t];
    const Vec& back = dx_b[n - 1 - t];
    for (size_t i = 0; i < back.size(); ++i) d_inputs[t][i] += back[i];
  }
  return d_inputs;
}

}  // namespace radpipe
