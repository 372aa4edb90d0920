#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "medgan/ops.hpp"
#include "medgan/params.hpp"
#include "medgan/prng.hpp"

// The three network families: U-net generator block, CasNet cascade, patch
// discriminator, plus the fixed (never trained) convolutional feature
// extractor used by the style loss and the FPD metric.
//
// All forwards are pure functions of (input, params) except that train-mode
// batch norm updates the running-stat entries of the ParamStore it is given.
// Backwards are hand-chained from the per-op backward companions using the
// tape each forward records.

namespace medgan {

inline constexpr double kBnEps = 1e-5;
inline constexpr double kBnMomentum = 0.1;
inline constexpr double kInitStddev = 0.02;
inline constexpr double kLeakySlope = 0.2;

// ---------------------------------------------------------------------------
// Specs

struct UNetSpec {
  int depth = 4;
  int base_channels = 16;
  int channel_cap = 128;
  int in_channels = 1;
  int out_channels = 1;

  // Channels produced by encoder level k (1-based): base * 2^(k-1), capped.
  int enc_channels(int k) const {
    std::int64_t c = std::int64_t(base_channels) << (k - 1);
    return int(c < channel_cap ? c : channel_cap);
  }
  // Channels produced by decoder stage k: mirrors the encoder.
  int dec_out_channels(int k) const {
    return k == 1 ? out_channels : enc_channels(k - 1);
  }
  // Decoder stage k consumes the previous stage's output concatenated with
  // the level-k encoder activation (the bottleneck stage has no skip).
  int dec_in_channels(int k) const {
    return k == depth ? enc_channels(depth) : 2 * enc_channels(k);
  }
};

struct CasNetSpec {
  int n_unets = 3;
  UNetSpec unet;
};

struct PatchDiscSpec {
  int layers = 3;  // strided hidden layers; the L of the feature stack
  int base_channels = 16;
  int channel_cap = 128;
  int in_channels = 2;  // candidate and condition, concatenated

  int hidden_channels(int i) const {
    std::int64_t c = std::int64_t(base_channels) << (i - 1);
    return int(c < channel_cap ? c : channel_cap);
  }
};

struct FixedExtractorSpec {
  std::uint64_t seed = 2027;
  std::vector<int> channels{8, 16, 32};  // 3x3 kernels, stride 2, relu
  int in_channels = 1;

  int n_layers() const { return int(channels.size()); }
};

// List of feature tensors. For the discriminator this is D_0..D_L with D_0
// the raw concatenated input; for the extractor it is V_1..V_B stored from
// index 0. Feature dims are carried by the tensor shapes.
template <typename S>
struct FeatureStack {
  std::vector<Tensor<S>> layers;
};

namespace detail {

template <typename S>
void accumulate(Tensor<S>& acc, Tensor<S>&& val) {
  if (acc.empty()) {
    acc = std::move(val);
  } else {
    acc.array() += val.array();
  }
}

template <typename S>
void add_grad(ParamStore<S>& grads, const std::string& name, const Tensor<S>& g) {
  grads[name].array() += g.array();
}

inline void check_divisible(int h, int w, int levels, const char* what) {
  const int m = 1 << levels;
  if (h % m != 0 || w % m != 0) {
    throw ShapeError(std::string(what) + ": spatial dims " + std::to_string(h) + "x" +
                     std::to_string(w) + " not divisible by 2^" + std::to_string(levels));
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Initialization. Weights ~ N(0, 0.02), biases 0, batch-norm gamma 1 /
// beta 0, running stats (0, 1); draws happen in canonical store order.

namespace detail {

template <typename S>
void add_conv(ParamStore<S>& st, Prng& prng, const std::string& prefix,
              int kh, int kw, int cin, int cout, double stddev) {
  st.add(prefix + ".w", sample_normal<S>(prng, 0.0, stddev, Shape4{kh, kw, cin, cout}));
  st.add(prefix + ".b", Tensor<S>(Shape4{1, 1, 1, cout}));
}

// Transposed-conv kernel layout is [kh, kw, cout, cin]; the bias runs over
// the output channels.
template <typename S>
void add_convt(ParamStore<S>& st, Prng& prng, const std::string& prefix,
               int kh, int kw, int cout, int cin, double stddev) {
  st.add(prefix + ".w", sample_normal<S>(prng, 0.0, stddev, Shape4{kh, kw, cout, cin}));
  st.add(prefix + ".b", Tensor<S>(Shape4{1, 1, 1, cout}));
}

template <typename S>
void add_bn(ParamStore<S>& st, const std::string& prefix, int c) {
  st.add(prefix + ".bn.gamma", Tensor<S>(Shape4{1, 1, 1, c}, S(1)));
  st.add(prefix + ".bn.beta", Tensor<S>(Shape4{1, 1, 1, c}));
  st.add(prefix + ".bn.running_mean", Tensor<S>(Shape4{1, 1, 1, c}), /*trainable=*/false);
  st.add(prefix + ".bn.running_var", Tensor<S>(Shape4{1, 1, 1, c}, S(1)), /*trainable=*/false);
}

}  // namespace detail

// Batch norm is omitted on the first encoder layer and on the output layer.
template <typename S>
ParamStore<S> init_params(const UNetSpec& spec, std::uint64_t seed) {
  Prng prng(seed);
  ParamStore<S> st;
  for (int k = 1; k <= spec.depth; ++k) {
    const int cin = k == 1 ? spec.in_channels : spec.enc_channels(k - 1);
    const std::string p = "enc" + std::to_string(k);
    detail::add_conv(st, prng, p, 4, 4, cin, spec.enc_channels(k), kInitStddev);
    if (k >= 2) detail::add_bn(st, p, spec.enc_channels(k));
  }
  for (int k = spec.depth; k >= 1; --k) {
    const std::string p = "dec" + std::to_string(k);
    detail::add_convt(st, prng, p, 4, 4, spec.dec_out_channels(k),
                      spec.dec_in_channels(k), kInitStddev);
    if (k >= 2) detail::add_bn(st, p, spec.dec_out_channels(k));
  }
  return st;
}

// One store per cascade stage, stage u seeded with derive_seed(seed, u).
template <typename S>
std::vector<ParamStore<S>> init_params(const CasNetSpec& spec, std::uint64_t seed) {
  if (spec.n_unets < 1) {
    throw ShapeError("CasNetSpec: n_unets must be >= 1");
  }
  if (spec.n_unets > 1 && spec.unet.out_channels != spec.unet.in_channels) {
    throw ShapeError("CasNetSpec: stage out_channels must equal in_channels to chain");
  }
  std::vector<ParamStore<S>> stores;
  stores.reserve(spec.n_unets);
  for (int u = 0; u < spec.n_unets; ++u) {
    stores.push_back(init_params<S>(spec.unet, derive_seed(seed, std::uint64_t(u))));
  }
  return stores;
}

template <typename S>
ParamStore<S> init_params(const PatchDiscSpec& spec, std::uint64_t seed) {
  Prng prng(seed);
  ParamStore<S> st;
  for (int i = 1; i <= spec.layers; ++i) {
    const int cin = i == 1 ? spec.in_channels : spec.hidden_channels(i - 1);
    const std::string p = "h" + std::to_string(i);
    detail::add_conv(st, prng, p, 4, 4, cin, spec.hidden_channels(i), kInitStddev);
    if (i >= 2) detail::add_bn(st, p, spec.hidden_channels(i));
  }
  detail::add_conv(st, prng, "proj", 3, 3, spec.hidden_channels(spec.layers), 1,
                   kInitStddev);
  return st;
}

// The extractor is generated once from its seed and never trained. Weights
// use sqrt(2 / fan_in) so random features keep unit-order magnitude through
// the relu stack.
template <typename S>
ParamStore<S> init_params(const FixedExtractorSpec& spec) {
  Prng prng(spec.seed);
  ParamStore<S> st;
  int cin = spec.in_channels;
  for (int i = 0; i < spec.n_layers(); ++i) {
    const int cout = spec.channels[size_t(i)];
    const double stddev = std::sqrt(2.0 / (9.0 * double(cin)));
    const std::string p = "l" + std::to_string(i + 1);
    st.add(p + ".w", sample_normal<S>(prng, 0.0, stddev, Shape4{3, 3, cin, cout}),
           /*trainable=*/false);
    st.add(p + ".b", Tensor<S>(Shape4{1, 1, 1, cout}), /*trainable=*/false);
    cin = cout;
  }
  return st;
}

// ---------------------------------------------------------------------------
// U-net. Encoder: 4x4 stride-2 conv, batch norm (levels 2+), leaky relu.
// Decoder: 4x4 stride-2 transposed conv, batch norm (stages 2+), relu, with
// the level-k encoder activation concatenated onto stage k's input; the final
// stage ends in tanh.

template <typename S>
struct UNetTape {
  BnMode mode = BnMode::kTrain;
  std::vector<Tensor<S>> enc_in;    // input to encoder conv k (enc_in[0] = network input)
  std::vector<Tensor<S>> enc_pre;   // post-bn pre-activation per level
  std::vector<BnCache<S>> enc_bn;
  std::vector<Tensor<S>> enc_out;   // a_k
  std::vector<Tensor<S>> dec_in;    // input to decoder stage k (concat for k < depth)
  std::vector<Tensor<S>> dec_pre;   // post-bn pre-activation (stages 2+)
  std::vector<BnCache<S>> dec_bn;
  Tensor<S> out;
};

template <typename S>
Tensor<S> unet_forward(const Tensor<S>& input, const UNetSpec& spec,
                       ParamStore<S>& params, BnMode mode,
                       UNetTape<S>* tape = nullptr) {
  const Shape4 in = input.shape();
  if (in.c != spec.in_channels) {
    throw ShapeError("unet_forward: input " + in.str() + " does not have " +
                     std::to_string(spec.in_channels) + " channels");
  }
  detail::check_divisible(in.h, in.w, spec.depth, "unet_forward");

  UNetTape<S> local;
  UNetTape<S>& tp = tape ? *tape : local;
  const int D = spec.depth;
  tp.mode = mode;
  tp.enc_in.assign(D, {});
  tp.enc_pre.assign(D, {});
  tp.enc_bn.assign(D, {});
  tp.enc_out.assign(D, {});
  tp.dec_in.assign(D, {});
  tp.dec_pre.assign(D, {});
  tp.dec_bn.assign(D, {});

  Tensor<S> a = input;
  for (int k = 1; k <= D; ++k) {
    const std::string p = "enc" + std::to_string(k);
    tp.enc_in[k - 1] = std::move(a);
    Tensor<S> z = conv2d(tp.enc_in[k - 1], params[p + ".w"], params[p + ".b"], 2, 1);
    if (k >= 2) {
      z = batch_norm(z, params[p + ".bn.gamma"], params[p + ".bn.beta"], mode,
                     params[p + ".bn.running_mean"], params[p + ".bn.running_var"],
                     S(kBnMomentum), S(kBnEps), &tp.enc_bn[k - 1]);
    }
    tp.enc_pre[k - 1] = std::move(z);
    a = leaky_relu(tp.enc_pre[k - 1], S(kLeakySlope));
    tp.enc_out[k - 1] = a;
  }

  Tensor<S> o = std::move(a);  // a_D
  for (int k = D; k >= 1; --k) {
    const std::string p = "dec" + std::to_string(k);
    tp.dec_in[k - 1] = (k == D) ? std::move(o)
                                : concat_channels(o, tp.enc_out[k - 1]);
    Tensor<S> v = conv_transpose2d(tp.dec_in[k - 1], params[p + ".w"],
                                   params[p + ".b"], 2, 1);
    if (k >= 2) {
      v = batch_norm(v, params[p + ".bn.gamma"], params[p + ".bn.beta"], mode,
                     params[p + ".bn.running_mean"], params[p + ".bn.running_var"],
                     S(kBnMomentum), S(kBnEps), &tp.dec_bn[k - 1]);
      tp.dec_pre[k - 1] = std::move(v);
      o = relu(tp.dec_pre[k - 1]);
    } else {
      o = tanh_act(v);
    }
  }
  tp.out = o;
  return o;
}

template <typename S>
struct UNetBack {
  Tensor<S> input;
  ParamStore<S> grads;
};

template <typename S>
UNetBack<S> unet_backward(const UNetSpec& spec, const ParamStore<S>& params,
                          const UNetTape<S>& tp, const Tensor<S>& dout) {
  const int D = spec.depth;
  UNetBack<S> out;
  out.grads = params.zeros_like();

  std::vector<Tensor<S>> da(size_t(D) + 1);  // grad wrt a_k; da[0] = input grad

  Tensor<S> d_upstream = dout;
  for (int k = 1; k <= D; ++k) {
    const std::string p = "dec" + std::to_string(k);
    Tensor<S> dv;
    if (k == 1) {
      dv = tanh_backward(tp.out, d_upstream);
    } else {
      Tensor<S> dr = relu_backward(tp.dec_pre[k - 1], d_upstream);
      BnGrads<S> bg = batch_norm_backward(tp.dec_bn[k - 1], params[p + ".bn.gamma"], dr);
      detail::add_grad(out.grads, p + ".bn.gamma", bg.gamma);
      detail::add_grad(out.grads, p + ".bn.beta", bg.beta);
      dv = std::move(bg.input);
    }
    ConvGrads<S> cg = conv_transpose2d_backward(tp.dec_in[k - 1], params[p + ".w"],
                                                2, 1, dv);
    detail::add_grad(out.grads, p + ".w", cg.kernel);
    detail::add_grad(out.grads, p + ".b", cg.bias);
    if (k == D) {
      detail::accumulate(da[size_t(D)], std::move(cg.input));
    } else {
      auto [do_next, dak] = split_channels(cg.input, spec.enc_channels(k));
      detail::accumulate(da[size_t(k)], std::move(dak));
      d_upstream = std::move(do_next);
    }
  }

  for (int k = D; k >= 1; --k) {
    const std::string p = "enc" + std::to_string(k);
    Tensor<S> dz = leaky_relu_backward(tp.enc_pre[k - 1], da[size_t(k)], S(kLeakySlope));
    if (k >= 2) {
      BnGrads<S> bg = batch_norm_backward(tp.enc_bn[k - 1], params[p + ".bn.gamma"], dz);
      detail::add_grad(out.grads, p + ".bn.gamma", bg.gamma);
      detail::add_grad(out.grads, p + ".bn.beta", bg.beta);
      dz = std::move(bg.input);
    }
    ConvGrads<S> cg = conv2d_backward(tp.enc_in[k - 1], params[p + ".w"], 2, 1, dz);
    detail::add_grad(out.grads, p + ".w", cg.kernel);
    detail::add_grad(out.grads, p + ".b", cg.bias);
    detail::accumulate(da[size_t(k) - 1], std::move(cg.input));
  }

  out.input = std::move(da[0]);
  return out;
}

// ---------------------------------------------------------------------------
// CasNet: the sequential composition of n_unets U-nets.

template <typename S>
Tensor<S> casnet_forward(const Tensor<S>& y, const CasNetSpec& spec,
                         std::vector<ParamStore<S>>& params, BnMode mode,
                         std::vector<UNetTape<S>>* tapes = nullptr,
                         std::vector<Tensor<S>>* intermediates = nullptr) {
  if (int(params.size()) != spec.n_unets) {
    throw ShapeError("casnet_forward: expected " + std::to_string(spec.n_unets) +
                     " param stores, got " + std::to_string(params.size()));
  }
  if (tapes) tapes->assign(size_t(spec.n_unets), {});
  if (intermediates) intermediates->clear();
  Tensor<S> x = y;
  for (int u = 0; u < spec.n_unets; ++u) {
    x = unet_forward(x, spec.unet, params[size_t(u)], mode,
                     tapes ? &(*tapes)[size_t(u)] : nullptr);
    if (intermediates) intermediates->push_back(x);
  }
  return x;
}

template <typename S>
struct CasNetBack {
  Tensor<S> input;
  std::vector<ParamStore<S>> grads;
};

template <typename S>
CasNetBack<S> casnet_backward(const CasNetSpec& spec,
                              const std::vector<ParamStore<S>>& params,
                              const std::vector<UNetTape<S>>& tapes,
                              const Tensor<S>& dout) {
  CasNetBack<S> out;
  out.grads.resize(params.size());
  Tensor<S> g = dout;
  for (int u = spec.n_unets - 1; u >= 0; --u) {
    UNetBack<S> ub = unet_backward(spec.unet, params[size_t(u)], tapes[size_t(u)], g);
    out.grads[size_t(u)] = std::move(ub.grads);
    g = std::move(ub.input);
  }
  out.input = std::move(g);
  return out;
}

// ---------------------------------------------------------------------------
// Patch discriminator. Hidden layers are 4x4 stride-2 convs (batch norm from
// layer 2 on, leaky relu); a 3x3 stride-1 projection maps the last hidden
// features to a one-channel logit map with one cell per image patch.

template <typename S>
struct DiscTape {
  BnMode mode = BnMode::kTrain;
  int cand_channels = 0;
  std::vector<Tensor<S>> conv_in;  // conv_in[0] is the concatenated input D_0
  std::vector<Tensor<S>> pre;
  std::vector<BnCache<S>> bn;
  Tensor<S> proj_in;  // D_L
};

template <typename S>
struct DiscOut {
  Tensor<S> logits;          // [n, h/2^L, w/2^L, 1]
  FeatureStack<S> features;  // D_0..D_L
};

template <typename S>
DiscOut<S> patch_disc_forward(const Tensor<S>& candidate, const Tensor<S>& condition,
                              const PatchDiscSpec& spec, ParamStore<S>& params,
                              BnMode mode, DiscTape<S>* tape = nullptr) {
  const Shape4 ca = candidate.shape(), co = condition.shape();
  if (ca.n != co.n || ca.h != co.h || ca.w != co.w) {
    throw ShapeError("patch_disc_forward: candidate " + ca.str() +
                     " and condition " + co.str() + " differ spatially");
  }
  if (ca.c + co.c != spec.in_channels) {
    throw ShapeError("patch_disc_forward: channel sum does not match spec in_channels");
  }
  detail::check_divisible(ca.h, ca.w, spec.layers, "patch_disc_forward");

  DiscTape<S> local;
  DiscTape<S>& tp = tape ? *tape : local;
  const int L = spec.layers;
  tp.mode = mode;
  tp.cand_channels = ca.c;
  tp.conv_in.assign(L, {});
  tp.pre.assign(L, {});
  tp.bn.assign(L, {});

  DiscOut<S> out;
  out.features.layers.resize(size_t(L) + 1);

  Tensor<S> x = concat_channels(candidate, condition);
  out.features.layers[0] = x;
  for (int i = 1; i <= L; ++i) {
    const std::string p = "h" + std::to_string(i);
    tp.conv_in[i - 1] = std::move(x);
    Tensor<S> z = conv2d(tp.conv_in[i - 1], params[p + ".w"], params[p + ".b"], 2, 1);
    if (i >= 2) {
      z = batch_norm(z, params[p + ".bn.gamma"], params[p + ".bn.beta"], mode,
                     params[p + ".bn.running_mean"], params[p + ".bn.running_var"],
                     S(kBnMomentum), S(kBnEps), &tp.bn[i - 1]);
    }
    tp.pre[i - 1] = std::move(z);
    x = leaky_relu(tp.pre[i - 1], S(kLeakySlope));
    out.features.layers[size_t(i)] = x;
  }
  tp.proj_in = std::move(x);
  out.logits = conv2d(tp.proj_in, params["proj.w"], params["proj.b"], 1, 1);
  return out;
}

// Scalar score per image: the mean of sigmoid over that image's patch cells.
template <typename S>
std::vector<S> patch_scores(const Tensor<S>& logits) {
  const Shape4 s = logits.shape();
  std::vector<S> scores(size_t(s.n), S(0));
  const std::int64_t per = std::int64_t(s.h) * s.w * s.c;
  for (int n = 0; n < s.n; ++n) {
    S acc = S(0);
    for (std::int64_t i = 0; i < per; ++i) {
      acc += sigmoid_scalar(logits[std::int64_t(n) * per + i]);
    }
    scores[size_t(n)] = acc / S(per);
  }
  return scores;
}

template <typename S>
struct DiscBack {
  Tensor<S> candidate;
  Tensor<S> condition;
  ParamStore<S> grads;
};

// dlogits may be empty when only feature gradients flow (perceptual passes
// with no adversarial term). dfeatures, when given, carries one gradient per
// stack level D_0..D_L; empty tensors are skipped.
template <typename S>
DiscBack<S> patch_disc_backward(const PatchDiscSpec& spec, const ParamStore<S>& params,
                                const DiscTape<S>& tp, const Tensor<S>& dlogits,
                                const std::vector<Tensor<S>>* dfeatures = nullptr) {
  const int L = spec.layers;
  DiscBack<S> out;
  out.grads = params.zeros_like();

  auto feature_grad = [&](int i) -> const Tensor<S>* {
    if (!dfeatures) return nullptr;
    const Tensor<S>& t = (*dfeatures)[size_t(i)];
    return t.empty() ? nullptr : &t;
  };

  Tensor<S> dx;
  if (!dlogits.empty()) {
    ConvGrads<S> pg = conv2d_backward(tp.proj_in, params["proj.w"], 1, 1, dlogits);
    detail::add_grad(out.grads, "proj.w", pg.kernel);
    detail::add_grad(out.grads, "proj.b", pg.bias);
    dx = std::move(pg.input);
  } else {
    dx = Tensor<S>(tp.proj_in.shape());
  }

  for (int i = L; i >= 1; --i) {
    const std::string p = "h" + std::to_string(i);
    if (const Tensor<S>* fg = feature_grad(i)) {
      dx.array() += fg->array();
    }
    Tensor<S> dz = leaky_relu_backward(tp.pre[i - 1], dx, S(kLeakySlope));
    if (i >= 2) {
      BnGrads<S> bg = batch_norm_backward(tp.bn[i - 1], params[p + ".bn.gamma"], dz);
      detail::add_grad(out.grads, p + ".bn.gamma", bg.gamma);
      detail::add_grad(out.grads, p + ".bn.beta", bg.beta);
      dz = std::move(bg.input);
    }
    ConvGrads<S> cg = conv2d_backward(tp.conv_in[i - 1], params[p + ".w"], 2, 1, dz);
    detail::add_grad(out.grads, p + ".w", cg.kernel);
    detail::add_grad(out.grads, p + ".b", cg.bias);
    dx = std::move(cg.input);
  }
  if (const Tensor<S>* fg = feature_grad(0)) {
    dx.array() += fg->array();
  }
  auto [dcand, dcond] = split_channels(dx, tp.cand_channels);
  out.candidate = std::move(dcand);
  out.condition = std::move(dcond);
  return out;
}

// ---------------------------------------------------------------------------
// Fixed feature extractor: 3x3 stride-2 pad-1 convs with relu. Frozen, but
// differentiable with respect to its input for the style-loss backward pass.

template <typename S>
struct ExtractorTape {
  std::vector<Tensor<S>> conv_in;
  std::vector<Tensor<S>> pre;
};

template <typename S>
FeatureStack<S> fixed_feature_extract(const Tensor<S>& x, const FixedExtractorSpec& spec,
                                      const ParamStore<S>& params,
                                      ExtractorTape<S>* tape = nullptr) {
  if (x.shape().c != spec.in_channels) {
    throw ShapeError("fixed_feature_extract: input " + x.shape().str() +
                     " does not have " + std::to_string(spec.in_channels) + " channels");
  }
  ExtractorTape<S> local;
  ExtractorTape<S>& tp = tape ? *tape : local;
  const int B = spec.n_layers();
  tp.conv_in.assign(B, {});
  tp.pre.assign(B, {});

  FeatureStack<S> out;
  out.layers.resize(size_t(B));
  Tensor<S> a = x;
  for (int i = 1; i <= B; ++i) {
    const std::string p = "l" + std::to_string(i);
    tp.conv_in[i - 1] = std::move(a);
    tp.pre[i - 1] = conv2d(tp.conv_in[i - 1], params[p + ".w"], params[p + ".b"], 2, 1);
    a = relu(tp.pre[i - 1]);
    out.layers[size_t(i) - 1] = a;
  }
  return out;
}

// dfeatures carries one gradient per V_1..V_B (empty tensors skipped);
// returns the gradient with respect to the extractor input.
template <typename S>
Tensor<S> extractor_backward(const FixedExtractorSpec& spec, const ParamStore<S>& params,
                             const ExtractorTape<S>& tp,
                             const std::vector<Tensor<S>>& dfeatures) {
  const int B = spec.n_layers();
  Tensor<S> dx;
  for (int i = B; i >= 1; --i) {
    const std::string p = "l" + std::to_string(i);
    Tensor<S> da = dx.empty() ? Tensor<S>(tp.pre[i - 1].shape()) : std::move(dx);
    if (!dfeatures[size_t(i) - 1].empty()) {
      da.array() += dfeatures[size_t(i) - 1].array();
    }
    Tensor<S> dz = relu_backward(tp.pre[i - 1], da);
    ConvGrads<S> cg = conv2d_backward(tp.conv_in[i - 1], params[p + ".w"], 2, 1, dz);
    dx = std::move(cg.input);
  }
  return dx;
}

}  // namespace medgan
