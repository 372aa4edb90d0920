#pragma once

#include <cmath>
#include <vector>

#include "medgan/params.hpp"
#include "medgan/tensor.hpp"

namespace medgan {

template <typename S>
struct AdamConfig {
  S lr = S(2e-4);
  S beta1 = S(0.5);
  S beta2 = S(0.999);
  S eps = S(1e-8);
};

// First/second-moment state aligned with the trainable entries of one
// ParamStore, in canonical order.
template <typename S>
struct AdamState {
  std::vector<Tensor<S>> m;
  std::vector<Tensor<S>> v;
  long t = 0;

  static AdamState like(const ParamStore<S>& params) {
    AdamState st;
    for (int i = 0; i < params.size(); ++i) {
      const auto& e = params.entry(i);
      if (!e.trainable) continue;
      st.m.emplace_back(e.value.shape());
      st.v.emplace_back(e.value.shape());
    }
    return st;
  }
};

// Bias-corrected Adam update over the trainable entries of `params`.
// Rejects non-finite gradients before touching any state.
template <typename S>
void adam_step(ParamStore<S>& params, const ParamStore<S>& grads,
               AdamState<S>& state, const AdamConfig<S>& cfg) {
  if (grads.size() != params.size()) {
    throw ShapeError("adam_step: grad store does not match param store");
  }
  for (int i = 0; i < params.size(); ++i) {
    if (!params.entry(i).trainable) continue;
    if (!grads.entry(i).value.all_finite()) {
      throw NumericError("adam_step: non-finite gradient for '" +
                         params.entry(i).name + "'");
    }
  }

  state.t += 1;
  const S bc1 = S(1) - std::pow(cfg.beta1, S(state.t));
  const S bc2 = S(1) - std::pow(cfg.beta2, S(state.t));

  int slot = 0;
  for (int i = 0; i < params.size(); ++i) {
    auto& e = params.entry(i);
    if (!e.trainable) continue;
    const auto& g = grads.entry(i).value.array();
    auto& m = state.m[slot].array();
    auto& v = state.v[slot].array();
    m = cfg.beta1 * m + (S(1) - cfg.beta1) * g;
    v = cfg.beta2 * v + (S(1) - cfg.beta2) * g.square();
    e.value.array() -= cfg.lr * (m / bc1) / ((v / bc2).sqrt() + cfg.eps);
    ++slot;
  }
}

}  // namespace medgan
