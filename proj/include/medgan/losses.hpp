#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <utility>
#include <vector>

#include "medgan/networks.hpp"
#include "medgan/ops.hpp"
#include "medgan/tensor.hpp"

// The composite training objective: adversarial terms on the patch logit
// maps, weighted per-layer MAE over discriminator features (level 0 is the
// raw-pixel reconstruction term), and the Gram-matrix style loss over fixed
// extractor features. Every piece returns the exact gradients the trainer
// consumes.

namespace medgan {

template <typename S>
struct LossWeights {
  S adv = S(1);
  std::vector<S> p;  // L+1 weights, index 0 = raw-pixel term
  std::vector<S> s;  // B weights

  static LossWeights medgan_defaults() {
    LossWeights w;
    w.adv = S(1);
    w.p = {S(20), S(5), S(5), S(5)};
    w.s = {S(10), S(10), S(10)};
    return w;
  }

  void validate(int disc_layers, int extractor_layers) const {
    if (int(p.size()) != disc_layers + 1) {
      throw ShapeError("LossWeights: need " + std::to_string(disc_layers + 1) +
                       " perceptual weights, got " + std::to_string(p.size()));
    }
    if (int(s.size()) != extractor_layers) {
      throw ShapeError("LossWeights: need " + std::to_string(extractor_layers) +
                       " style weights, got " + std::to_string(s.size()));
    }
    auto ok = [](S v) { return std::isfinite(double(v)) && v >= S(0); };
    if (!ok(adv)) throw ShapeError("LossWeights: bad adversarial weight");
    for (S v : p) {
      if (!ok(v)) throw ShapeError("LossWeights: bad perceptual weight");
    }
    for (S v : s) {
      if (!ok(v)) throw ShapeError("LossWeights: bad style weight");
    }
  }

  bool any_style() const {
    for (S v : s) {
      if (v != S(0)) return true;
    }
    return false;
  }
  bool any_hidden_perceptual() const {
    for (size_t i = 1; i < p.size(); ++i) {
      if (p[i] != S(0)) return true;
    }
    return false;
  }
};

// ---------------------------------------------------------------------------
// Adversarial terms, numerically stable log-sigmoid form.
// L_D = -mean log s(real) - mean log s(-fake), means over all cells.

template <typename S>
struct AdvLossD {
  S value = S(0);
  Tensor<S> d_real;
  Tensor<S> d_fake;
};

template <typename S>
AdvLossD<S> adv_loss_d(const Tensor<S>& real_logits, const Tensor<S>& fake_logits) {
  require_shape(fake_logits, real_logits.shape(), "adv_loss_d");
  const std::int64_t N = real_logits.size();
  AdvLossD<S> out;
  out.d_real = Tensor<S>(real_logits.shape());
  out.d_fake = Tensor<S>(fake_logits.shape());
  double acc = 0.0;
  for (std::int64_t i = 0; i < N; ++i) {
    acc -= double(log_sigmoid(real_logits[i]));
    acc -= double(log_sigmoid(-fake_logits[i]));
    out.d_real[i] = (sigmoid_scalar(real_logits[i]) - S(1)) / S(N);
    out.d_fake[i] = sigmoid_scalar(fake_logits[i]) / S(N);
  }
  out.value = S(acc / double(N));
  return out;
}

template <typename S>
struct AdvLossG {
  S value = S(0);
  Tensor<S> d_fake;
};

// Non-saturating generator term -mean log s(fake); `saturating` switches to
// the literal min-max form +mean log s(-fake).
template <typename S>
AdvLossG<S> adv_loss_g(const Tensor<S>& fake_logits, bool saturating = false) {
  const std::int64_t N = fake_logits.size();
  AdvLossG<S> out;
  out.d_fake = Tensor<S>(fake_logits.shape());
  double acc = 0.0;
  for (std::int64_t i = 0; i < N; ++i) {
    if (saturating) {
      acc += double(log_sigmoid(-fake_logits[i]));
      out.d_fake[i] = -sigmoid_scalar(fake_logits[i]) / S(N);
    } else {
      acc -= double(log_sigmoid(fake_logits[i]));
      out.d_fake[i] = -(S(1) - sigmoid_scalar(fake_logits[i])) / S(N);
    }
  }
  out.value = S(acc / double(N));
  return out;
}

// ---------------------------------------------------------------------------
// Perceptual loss: weighted sum over layers of the mean absolute difference.
// Gradients are with respect to the `fake` stack; the sign convention at an
// exact tie is sign(0) = 0.

template <typename S>
struct PerceptualLoss {
  S value = S(0);
  std::vector<S> per_layer;
  std::vector<Tensor<S>> d_fake;  // aligned with the stack; empty where weight is 0
};

template <typename S>
PerceptualLoss<S> perceptual_loss(const FeatureStack<S>& fake, const FeatureStack<S>& real,
                                  const std::vector<S>& lambda_p) {
  if (fake.layers.size() != real.layers.size() ||
      fake.layers.size() != lambda_p.size()) {
    throw ShapeError("perceptual_loss: stack/weight length mismatch");
  }
  PerceptualLoss<S> out;
  out.per_layer.assign(lambda_p.size(), S(0));
  out.d_fake.resize(lambda_p.size());
  for (size_t i = 0; i < lambda_p.size(); ++i) {
    const Tensor<S>& a = fake.layers[i];
    const Tensor<S>& b = real.layers[i];
    require_shape(b, a.shape(), "perceptual_loss layer");
    if (lambda_p[i] == S(0)) continue;
    const std::int64_t N = a.size();
    double acc = 0.0;
    Tensor<S> g(a.shape());
    for (std::int64_t j = 0; j < N; ++j) {
      const S d = a[j] - b[j];
      acc += std::abs(double(d));
      g[j] = lambda_p[i] * (d > S(0) ? S(1) : (d < S(0) ? S(-1) : S(0))) / S(N);
    }
    out.per_layer[i] = S(acc / double(N));
    out.d_fake[i] = std::move(g);
    out.value += lambda_p[i] * out.per_layer[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gram matrix of a feature map [n, h, w, d]: per-image channel correlations
// normalized by 1/(h*w*d), averaged over the batch. The upper triangle is
// computed once and mirrored, so symmetry is exact.

template <typename S>
using GramMatrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <typename S>
GramMatrix<S> gram_matrix(const Tensor<S>& v) {
  const Shape4 s = v.shape();
  if (s.c < 1 || s.n < 1) {
    throw ShapeError("gram_matrix: bad feature shape " + s.str());
  }
  const std::int64_t hw = std::int64_t(s.h) * s.w;
  const double norm = 1.0 / (double(hw) * double(s.c));
  GramMatrix<S> g = GramMatrix<S>::Zero(s.c, s.c);
  for (int n = 0; n < s.n; ++n) {
    const S* base = v.data() + n * hw * s.c;
    for (int m = 0; m < s.c; ++m) {
      for (int q = m; q < s.c; ++q) {
        double acc = 0.0;
        const S* p = base;
        for (std::int64_t r = 0; r < hw; ++r, p += s.c) {
          acc += double(p[m]) * double(p[q]);
        }
        g(m, q) += S(acc * norm / double(s.n));
      }
    }
  }
  for (int m = 0; m < s.c; ++m) {
    for (int q = 0; q < m; ++q) g(m, q) = g(q, m);
  }
  return g;
}

// Pullback of an upstream d(loss)/dG onto the feature map.
template <typename S>
Tensor<S> gram_backward(const Tensor<S>& v, const GramMatrix<S>& upstream) {
  const Shape4 s = v.shape();
  const std::int64_t hw = std::int64_t(s.h) * s.w;
  const double norm = 1.0 / (double(hw) * double(s.c) * double(s.n));
  GramMatrix<S> u_sym = upstream + upstream.transpose();
  Tensor<S> out(s);
  for (int n = 0; n < s.n; ++n) {
    const S* src = v.data() + n * hw * s.c;
    S* dst = out.data() + n * hw * s.c;
    for (std::int64_t r = 0; r < hw; ++r, src += s.c, dst += s.c) {
      for (int m = 0; m < s.c; ++m) {
        double acc = 0.0;
        for (int q = 0; q < s.c; ++q) {
          acc += double(u_sym(m, q)) * double(src[q]);
        }
        dst[m] = S(acc * norm);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Style loss: sum over extractor layers of lambda_i / (4 d_i^2) times the
// squared Frobenius distance between the Gram matrices of x_hat and x.

template <typename S>
struct StyleLoss {
  S value = S(0);
  std::vector<S> per_layer;
  Tensor<S> d_xhat;
};

template <typename S>
StyleLoss<S> style_loss(const Tensor<S>& xhat, const Tensor<S>& x,
                        const FixedExtractorSpec& spec, const ParamStore<S>& eparams,
                        const std::vector<S>& lambda_s) {
  require_shape(x, xhat.shape(), "style_loss");
  const int B = spec.n_layers();
  if (int(lambda_s.size()) != B) {
    throw ShapeError("style_loss: expected " + std::to_string(B) + " weights");
  }
  StyleLoss<S> out;
  out.per_layer.assign(size_t(B), S(0));

  ExtractorTape<S> tape;
  const FeatureStack<S> f_hat = fixed_feature_extract(xhat, spec, eparams, &tape);
  const FeatureStack<S> f_ref = fixed_feature_extract(x, spec, eparams);

  std::vector<Tensor<S>> dfeat(static_cast<size_t>(B));
  for (int i = 0; i < B; ++i) {
    if (lambda_s[size_t(i)] == S(0)) continue;
    const Tensor<S>& v = f_hat.layers[size_t(i)];
    const GramMatrix<S> g_hat = gram_matrix(v);
    const GramMatrix<S> g_ref = gram_matrix(f_ref.layers[size_t(i)]);
    const GramMatrix<S> diff = g_hat - g_ref;
    const double d = double(v.shape().c);
    const double scale = 1.0 / (4.0 * d * d);
    out.per_layer[size_t(i)] = S(double(diff.squaredNorm()) * scale);
    out.value += lambda_s[size_t(i)] * out.per_layer[size_t(i)];
    // d(loss)/dG = lambda / (2 d^2) * diff
    const S factor = S(double(lambda_s[size_t(i)]) * 2.0 * scale);
    GramMatrix<S> dg = diff * factor;
    dfeat[size_t(i)] = gram_backward(v, dg);
  }
  out.d_xhat = extractor_backward(spec, eparams, tape, dfeat);
  return out;
}

// ---------------------------------------------------------------------------
// Full generator objective. Returns the loss pieces and the gradients with
// respect to the generator parameters only; discriminator and extractor
// parameters receive no updates from this path.
//
// The level-0 perceptual term compares the candidate images directly
// (x_hat vs x), so a (1, 0, ..., 0) perceptual weight vector makes the total
// exactly the pixel MAE.

template <typename S>
struct GeneratorObjective {
  S total = S(0);
  S adv = S(0);      // unweighted adversarial term
  S percep = S(0);   // weighted perceptual sum
  S style = S(0);    // weighted style sum
  Tensor<S> xhat;
  std::vector<ParamStore<S>> g_grads;
};

template <typename S>
GeneratorObjective<S> generator_objective(
    const Tensor<S>& y, const Tensor<S>& x, const CasNetSpec& gspec,
    std::vector<ParamStore<S>>& gparams, const PatchDiscSpec& dspec,
    ParamStore<S>& dparams, const FixedExtractorSpec& espec,
    const ParamStore<S>& eparams, const LossWeights<S>& weights,
    bool saturating = false, BnMode mode = BnMode::kTrain) {
  require_shape(x, y.shape(), "generator_objective");
  weights.validate(dspec.layers, espec.n_layers());

  GeneratorObjective<S> out;
  std::vector<UNetTape<S>> g_tapes;
  out.xhat = casnet_forward(y, gspec, gparams, mode, &g_tapes);

  Tensor<S> d_xhat(out.xhat.shape());

  // Raw-pixel reconstruction term (level 0), straight on the images.
  S percep_acc = S(0);
  const S lp0 = weights.p[0];
  if (lp0 != S(0)) {
    const std::int64_t N = out.xhat.size();
    double acc = 0.0;
    for (std::int64_t j = 0; j < N; ++j) {
      const S d = out.xhat[j] - x[j];
      acc += std::abs(double(d));
      d_xhat[j] += lp0 * (d > S(0) ? S(1) : (d < S(0) ? S(-1) : S(0))) / S(N);
    }
    percep_acc += lp0 * S(acc / double(N));
  }

  const bool need_disc = weights.adv != S(0) || weights.any_hidden_perceptual();
  if (need_disc) {
    DiscTape<S> d_tape;
    DiscOut<S> fake = patch_disc_forward(out.xhat, y, dspec, dparams, mode, &d_tape);

    Tensor<S> d_logits;
    if (weights.adv != S(0)) {
      AdvLossG<S> adv = adv_loss_g(fake.logits, saturating);
      out.adv = adv.value;
      d_logits = std::move(adv.d_fake);
      d_logits.array() *= weights.adv;
    }

    std::vector<Tensor<S>> dfeat(size_t(dspec.layers) + 1);
    if (weights.any_hidden_perceptual()) {
      const DiscOut<S> real = patch_disc_forward(x, y, dspec, dparams, mode);
      for (int i = 1; i <= dspec.layers; ++i) {
        const S lp = weights.p[size_t(i)];
        if (lp == S(0)) continue;
        const Tensor<S>& a = fake.features.layers[size_t(i)];
        const Tensor<S>& b = real.features.layers[size_t(i)];
        const std::int64_t N = a.size();
        double acc = 0.0;
        Tensor<S> g(a.shape());
        for (std::int64_t j = 0; j < N; ++j) {
          const S d = a[j] - b[j];
          acc += std::abs(double(d));
          g[j] = lp * (d > S(0) ? S(1) : (d < S(0) ? S(-1) : S(0))) / S(N);
        }
        percep_acc += lp * S(acc / double(N));
        dfeat[size_t(i)] = std::move(g);
      }
    }

    DiscBack<S> db = patch_disc_backward(dspec, dparams, d_tape, d_logits, &dfeat);
    d_xhat.array() += db.candidate.array();
    // db.grads and db.condition are dropped: D gets no update here and y is data.
  }
  out.percep = percep_acc;

  if (weights.any_style()) {
    StyleLoss<S> st = style_loss(out.xhat, x, espec, eparams, weights.s);
    out.style = st.value;
    d_xhat.array() += st.d_xhat.array();
  }

  out.total = weights.adv * out.adv + out.percep + out.style;

  CasNetBack<S> gb = casnet_backward(gspec, gparams, g_tapes, d_xhat);
  out.g_grads = std::move(gb.grads);
  return out;
}

}  // namespace medgan
