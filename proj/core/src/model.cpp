// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

#include "charrnn/model.hpp"

#include <cmath>
#include <stdexcept>

#include "charrnn/errors.hpp"

namespace charrnn {

void ModelConfig::validate() const {
  if (vocab_size == 0) throw ConfigError("vocab_size must be >= 1");
  if (num_layers == 0) throw ConfigError("num_layers must be >= 1");
  if (hidden_size == 0) throw ConfigError("hidden_size must be >= 1");
  if (dense_size == 0) throw ConfigError("dense_size must be >= 1");
  if (!(leakiness >= 0.0)) throw ConfigError("leakiness must be >= 0");
}

namespace {

constexpr const char* kGateNames[kNumGates] = {"i", "f", "c", "o"};
constexpr const char* kPeepholeNames[3] = {"i", "f", "o"};

template <typename T, typename Params>
std::vector<TensorRef<T>> collect_tensors(Params& p) {
  std::vector<TensorRef<T>> out;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& layer = p.layers[l];
    const std::string prefix = "lstm" + std::to_string(l) + ".";
    for (std::size_t g = 0; g < kNumGates; ++g)
      out.push_back({prefix + "U_" + kGateNames[g], layer.input[g].span(), TensorRole::kWeight});
    for (std::size_t g = 0; g < kNumGates; ++g)
      out.push_back({prefix + "W_" + kGateNames[g], layer.recurrent[g].span(), TensorRole::kWeight});
    for (std::size_t k = 0; k < 3; ++k)
      out.push_back({prefix + "w_" + kPeepholeNames[k], layer.peephole[k].span(), TensorRole::kWeight});
    for (std::size_t g = 0; g < kNumGates; ++g)
      out.push_back({prefix + "b_" + kGateNames[g], layer.bias[g].span(), TensorRole::kWeight});
    out.push_back({prefix + "h0", layer.h0.span(), TensorRole::kInitialState});
    out.push_back({prefix + "c0", layer.c0.span(), TensorRole::kInitialState});
  }
  out.push_back({"dense1.W", p.hidden_dense.weight.span(), TensorRole::kWeight});
  out.push_back({"dense1.b", p.hidden_dense.bias.span(), TensorRole::kWeight});
  out.push_back({"dense2.W", p.output_dense.weight.span(), TensorRole::kWeight});
  out.push_back({"dense2.b", p.output_dense.bias.span(), TensorRole::kWeight});
  return out;
}

template <std::floating_point Real>
void require_shape(const Matrix<Real>& m, std::size_t rows, std::size_t cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols)
    throw std::invalid_argument(std::string(what) + ": expected " + shape_string(rows, cols) +
                                ", got " + shape_string(m.rows(), m.cols()));
}

template <std::floating_point Real>
void require_size(const Vector<Real>& v, std::size_t n, const char* what) {
  if (v.size() != n)
    throw std::invalid_argument(std::string(what) + ": expected length " + std::to_string(n) +
                                ", got " + std::to_string(v.size()));
}

template <std::floating_point Real>
Real sigmoid_r(Real x) {
  if (x >= Real(0)) return Real(1) / (Real(1) + std::exp(-x));
  const Real e = std::exp(x);
  return e / (Real(1) + e);
}

// Gate pre-activations must already hold U x (or the gathered columns).
// Adds W h_prev, the bias and peepholes, then applies the cell equations.
template <std::floating_point Real>
void finish_lstm_step(const LstmLayerParams<Real>& p, const LayerState<Real>& in,
                      std::array<Matrix<Real>, kNumGates>& pre, LayerCache<Real>& out) {
  const std::size_t lanes = in.h.rows();
  const std::size_t hidden = in.h.cols();
  for (std::size_t g = 0; g < kNumGates; ++g) {
    gemm_nt(in.h, p.recurrent[g], pre[g]);
    add_row_broadcast(pre[g], p.bias[g]);
  }
  for (std::size_t k = 0; k < kPeepholeGates.size(); ++k) {
    Matrix<Real>& m = pre[kPeepholeGates[k]];
    const Real* w = p.peephole[k].data();
    for (std::size_t b = 0; b < lanes; ++b) {
      Real* row = m.data() + b * hidden;
      const Real* c_prev = in.c.data() + b * hidden;
      for (std::size_t r = 0; r < hidden; ++r) row[r] += w[r] * c_prev[r];
    }
  }
  out.i = Matrix<Real>(lanes, hidden);
  out.f = Matrix<Real>(lanes, hidden);
  out.g = Matrix<Real>(lanes, hidden);
  out.o = Matrix<Real>(lanes, hidden);
  out.c = Matrix<Real>(lanes, hidden);
  out.h = Matrix<Real>(lanes, hidden);
  out.tanh_c = Matrix<Real>(lanes, hidden);
  const std::size_t n = lanes * hidden;
  const Real* c_prev = in.c.data();
  for (std::size_t k = 0; k < n; ++k) {
    const Real i = sigmoid_r(pre[kInputGate].data()[k]);
    const Real f = sigmoid_r(pre[kForgetGate].data()[k]);
    const Real g = std::tanh(pre[kCellGate].data()[k]);
    const Real o = sigmoid_r(pre[kOutputGate].data()[k]);
    const Real c = f * c_prev[k] + i * g;
    const Real tc = std::tanh(c);
    out.i.data()[k] = i;
    out.f.data()[k] = f;
    out.g.data()[k] = g;
    out.o.data()[k] = o;
    out.c.data()[k] = c;
    out.tanh_c.data()[k] = tc;
    out.h.data()[k] = o * tc;
  }
}

template <std::floating_point Real>
void check_state(const LayerState<Real>& s, std::size_t hidden) {
  if (s.h.cols() != hidden || s.c.cols() != hidden || s.h.rows() != s.c.rows())
    throw std::invalid_argument("lstm_step: state shape " + shape_string(s.h.rows(), s.h.cols()) +
                                " does not match hidden size " + std::to_string(hidden));
}

template <std::floating_point Real>
void check_token(TokenId t, std::size_t vocab) {
  if (t >= vocab)
    throw std::out_of_range("token id " + std::to_string(t) + " out of range for vocabulary of " +
                            std::to_string(vocab));
}

// Runs the LSTM stack for one step; caches go into `step.layers`.
template <std::floating_point Real>
void lstm_stack_step(const Parameters<Real>& params, const ModelConfig& cfg,
                     std::span<const TokenId> tokens, const LstmState<Real>& state_in,
                     StepCache<Real>& step) {
  step.layers.resize(cfg.num_layers);
  step.layers[0] = lstm_step(params, 0, tokens, state_in.layers[0]);
  for (std::size_t l = 1; l < cfg.num_layers; ++l)
    step.layers[l] = lstm_step(params, l, step.layers[l - 1].h, state_in.layers[l]);
}

template <std::floating_point Real>
LstmState<Real> state_of(const StepCache<Real>& step) {
  LstmState<Real> s;
  s.layers.reserve(step.layers.size());
  for (const auto& lc : step.layers) s.layers.push_back({lc.h, lc.c});
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Parameters

template <std::floating_point Real>
Parameters<Real> Parameters<Real>::zeros(const ModelConfig& cfg) {
  cfg.validate();
  Parameters p;
  const std::size_t h = cfg.hidden_size;
  p.layers.resize(cfg.num_layers);
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    auto& layer = p.layers[l];
    for (std::size_t g = 0; g < kNumGates; ++g) {
      layer.input[g] = Matrix<Real>(h, cfg.input_size(l));
      layer.recurrent[g] = Matrix<Real>(h, h);
      layer.bias[g] = Vector<Real>(h);
    }
    for (auto& w : layer.peephole) w = Vector<Real>(h);
    layer.h0 = Vector<Real>(h);
    layer.c0 = Vector<Real>(h);
  }
  p.hidden_dense = {Matrix<Real>(cfg.dense_size, h), Vector<Real>(cfg.dense_size)};
  p.output_dense = {Matrix<Real>(cfg.vocab_size, cfg.dense_size), Vector<Real>(cfg.vocab_size)};
  return p;
}

template <std::floating_point Real>
std::vector<TensorRef<Real>> Parameters<Real>::tensors() {
  return collect_tensors<Real>(*this);
}

template <std::floating_point Real>
std::vector<TensorRef<const Real>> Parameters<Real>::tensors() const {
  return collect_tensors<const Real>(*this);
}

template <std::floating_point Real>
std::size_t Parameters<Real>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += t.values.size();
  return n;
}

template <std::floating_point Real>
void Parameters<Real>::check_shapes(const ModelConfig& cfg) const {
  if (layers.size() != cfg.num_layers)
    throw std::invalid_argument("parameters have " + std::to_string(layers.size()) +
                                " LSTM layers, config expects " + std::to_string(cfg.num_layers));
  const std::size_t h = cfg.hidden_size;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    for (std::size_t g = 0; g < kNumGates; ++g) {
      require_shape(layer.input[g], h, cfg.input_size(l), "LSTM input matrix");
      require_shape(layer.recurrent[g], h, h, "LSTM recurrent matrix");
      require_size(layer.bias[g], h, "LSTM bias");
    }
    for (const auto& w : layer.peephole) require_size(w, h, "LSTM peephole");
    require_size(layer.h0, h, "initial hidden state");
    require_size(layer.c0, h, "initial cell state");
  }
  require_shape(hidden_dense.weight, cfg.dense_size, h, "dense1 weight");
  require_size(hidden_dense.bias, cfg.dense_size, "dense1 bias");
  require_shape(output_dense.weight, cfg.vocab_size, cfg.dense_size, "dense2 weight");
  require_size(output_dense.bias, cfg.vocab_size, "dense2 bias");
}

// ---------------------------------------------------------------------------
// States

template <std::floating_point Real>
LstmState<Real> LstmState<Real>::zeros(const ModelConfig& cfg, std::size_t lanes) {
  LstmState s;
  s.layers.assign(cfg.num_layers,
                  {Matrix<Real>(lanes, cfg.hidden_size), Matrix<Real>(lanes, cfg.hidden_size)});
  return s;
}

template <std::floating_point Real>
LstmState<Real> LstmState<Real>::lane(std::size_t j) const {
  if (j >= lanes()) throw std::out_of_range("LstmState::lane: lane " + std::to_string(j));
  LstmState s;
  for (const auto& layer : layers) {
    const std::size_t hidden = layer.h.cols();
    LayerState<Real> ls{Matrix<Real>(1, hidden), Matrix<Real>(1, hidden)};
    std::copy_n(layer.h.row(j).begin(), hidden, ls.h.data());
    std::copy_n(layer.c.row(j).begin(), hidden, ls.c.data());
    s.layers.push_back(std::move(ls));
  }
  return s;
}

template <std::floating_point Real>
void LstmState<Real>::set_lane(std::size_t j, const LstmState& single) {
  if (j >= lanes() || single.layers.size() != layers.size() || single.lanes() != 1)
    throw std::invalid_argument("LstmState::set_lane: incompatible state");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    std::copy_n(single.layers[l].h.data(), layers[l].h.cols(), layers[l].h.row(j).begin());
    std::copy_n(single.layers[l].c.data(), layers[l].c.cols(), layers[l].c.row(j).begin());
  }
}

template <std::floating_point Real>
LstmState<Real> ForwardTape<Real>::state_after(std::size_t t) const {
  if (t >= steps.size()) throw std::out_of_range("ForwardTape::state_after: step out of range");
  return state_of(steps[t]);
}

// ---------------------------------------------------------------------------
// Construction

template <std::floating_point Real>
Parameters<Real> init_parameters(const ModelConfig& cfg, Rng& rng) {
  Parameters<Real> p = Parameters<Real>::zeros(cfg);
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    auto& layer = p.layers[l];
    for (std::size_t g = 0; g < kNumGates; ++g) {
      layer.input[g] = orthogonal_init<Real>(cfg.hidden_size, cfg.input_size(l), rng);
      layer.recurrent[g] = orthogonal_init<Real>(cfg.hidden_size, cfg.hidden_size, rng);
    }
  }
  p.hidden_dense.weight = glorot_uniform_init<Real>(cfg.dense_size, cfg.hidden_size, rng);
  p.output_dense.weight = glorot_uniform_init<Real>(cfg.vocab_size, cfg.dense_size, rng);
  return p;
}

template <std::floating_point Real>
Vector<Real> one_hot(TokenId token, std::size_t size) {
  check_token<Real>(token, size);
  Vector<Real> v(size);
  v[token] = Real(1);
  return v;
}

template <std::floating_point Real>
LstmState<Real> initial_state(const Parameters<Real>& params, const ModelConfig& cfg,
                              std::size_t lanes) {
  LstmState<Real> s = LstmState<Real>::zeros(cfg, lanes);
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    for (std::size_t b = 0; b < lanes; ++b) {
      std::copy(params.layers[l].h0.begin(), params.layers[l].h0.end(), s.layers[l].h.row(b).begin());
      std::copy(params.layers[l].c0.begin(), params.layers[l].c0.end(), s.layers[l].c.row(b).begin());
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Forward

template <std::floating_point Real>
LayerCache<Real> lstm_step(const Parameters<Real>& params, std::size_t layer,
                           const Matrix<Real>& x, const LayerState<Real>& state_in) {
  const auto& p = params.layers.at(layer);
  const std::size_t hidden = p.h0.size();
  check_state(state_in, hidden);
  if (x.rows() != state_in.h.rows())
    throw std::invalid_argument("lstm_step: input has " + std::to_string(x.rows()) +
                                " lanes, state has " + std::to_string(state_in.h.rows()));
  std::array<Matrix<Real>, kNumGates> pre;
  for (std::size_t g = 0; g < kNumGates; ++g) {
    pre[g] = Matrix<Real>(x.rows(), hidden);
    gemm_nt(x, p.input[g], pre[g]);
  }
  LayerCache<Real> out;
  finish_lstm_step(p, state_in, pre, out);
  return out;
}

template <std::floating_point Real>
LayerCache<Real> lstm_step(const Parameters<Real>& params, std::size_t layer,
                           std::span<const TokenId> tokens, const LayerState<Real>& state_in) {
  if (layer != 0) throw std::invalid_argument("lstm_step: token input is only valid for layer 0");
  const auto& p = params.layers.front();
  const std::size_t hidden = p.h0.size();
  const std::size_t vocab = p.input[0].cols();
  check_state(state_in, hidden);
  if (tokens.size() != state_in.h.rows())
    throw std::invalid_argument("lstm_step: " + std::to_string(tokens.size()) +
                                " tokens for a state with " + std::to_string(state_in.h.rows()) +
                                " lanes");
  for (TokenId t : tokens) check_token<Real>(t, vocab);
  std::array<Matrix<Real>, kNumGates> pre;
  for (std::size_t g = 0; g < kNumGates; ++g) {
    pre[g] = Matrix<Real>(tokens.size(), hidden);
    const Real* u = p.input[g].data();
    for (std::size_t b = 0; b < tokens.size(); ++b) {
      Real* row = pre[g].data() + b * hidden;
      for (std::size_t r = 0; r < hidden; ++r) row[r] = u[r * vocab + tokens[b]];
    }
  }
  LayerCache<Real> out;
  finish_lstm_step(p, state_in, pre, out);
  return out;
}

template <std::floating_point Real>
void output_head(const Parameters<Real>& params, const ModelConfig& cfg, const Matrix<Real>& top_h,
                 StepCache<Real>& cache) {
  const std::size_t lanes = top_h.rows();
  cache.dense_pre = Matrix<Real>(lanes, cfg.dense_size);
  gemm_nt(top_h, params.hidden_dense.weight, cache.dense_pre);
  add_row_broadcast(cache.dense_pre, params.hidden_dense.bias);
  cache.dense_out = cache.dense_pre;
  const Real leak = static_cast<Real>(cfg.leakiness);
  for (Real& v : cache.dense_out.span())
    if (v < Real(0)) v *= leak;
  cache.probs = Matrix<Real>(lanes, cfg.vocab_size);
  gemm_nt(cache.dense_out, params.output_dense.weight, cache.probs);
  add_row_broadcast(cache.probs, params.output_dense.bias);
  for (std::size_t b = 0; b < lanes; ++b) softmax_inplace(cache.probs.row(b));
  cache.has_output = true;
}

template <std::floating_point Real>
StepOutput<Real> forward_step(const Parameters<Real>& params, const ModelConfig& cfg, TokenId token,
                              const LstmState<Real>& state_in) {
  auto seq = forward_sequence(params, cfg, std::span<const TokenId>(&token, 1), state_in);
  StepOutput<Real> out;
  out.cache = std::move(seq.tape.steps.front());
  out.y = Vector<Real>(std::vector<Real>(out.cache.probs.span().begin(), out.cache.probs.span().end()));
  out.state = std::move(seq.state);
  return out;
}

template <std::floating_point Real>
SequenceOutput<Real> forward_sequence(const Parameters<Real>& params, const ModelConfig& cfg,
                                      std::span<const TokenId> tokens,
                                      const LstmState<Real>& state_in) {
  if (state_in.lanes() != 1)
    throw std::invalid_argument("forward_sequence: expected a single-lane state");
  std::vector<std::vector<TokenId>> inputs{std::vector<TokenId>(tokens.begin(), tokens.end())};
  return forward_lanes(params, cfg, inputs, state_in);
}

template <std::floating_point Real>
SequenceOutput<Real> forward_lanes(const Parameters<Real>& params, const ModelConfig& cfg,
                                   const std::vector<std::vector<TokenId>>& inputs,
                                   const LstmState<Real>& state_in,
                                   const std::vector<bool>& head_mask) {
  if (inputs.empty()) throw std::invalid_argument("forward_lanes: no lanes");
  const std::size_t length = inputs.front().size();
  if (length == 0) throw std::invalid_argument("forward_lanes: empty sequence");
  for (const auto& lane : inputs)
    if (lane.size() != length) throw std::invalid_argument("forward_lanes: ragged lanes");
  if (state_in.lanes() != inputs.size() || state_in.layers.size() != cfg.num_layers)
    throw std::invalid_argument("forward_lanes: state has " + std::to_string(state_in.lanes()) +
                                " lanes, input has " + std::to_string(inputs.size()));
  if (!head_mask.empty() && head_mask.size() != length)
    throw std::invalid_argument("forward_lanes: head mask length mismatch");

  SequenceOutput<Real> out;
  out.tape.initial = state_in;
  out.tape.steps.resize(length);
  const std::size_t lanes = inputs.size();
  std::vector<TokenId> column(lanes);
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t b = 0; b < lanes; ++b) column[b] = inputs[b][t];
    StepCache<Real>& step = out.tape.steps[t];
    step.tokens = column;
    const LstmState<Real>& prev = t == 0 ? state_in : out.state;
    lstm_stack_step(params, cfg, std::span<const TokenId>(column), prev, step);
    out.state = state_of(step);
    if (head_mask.empty() || head_mask[t]) output_head(params, cfg, step.layers.back().h, step);
  }
  return out;
}

template <std::floating_point Real>
Matrix<Real> advance(const Parameters<Real>& params, const ModelConfig& cfg,
                     std::span<const TokenId> tokens, LstmState<Real>& state, bool want_output) {
  StepCache<Real> step;
  lstm_stack_step(params, cfg, tokens, state, step);
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    state.layers[l].h = std::move(step.layers[l].h);
    state.layers[l].c = std::move(step.layers[l].c);
  }
  if (!want_output) return {};
  output_head(params, cfg, state.layers.back().h, step);
  return std::move(step.probs);
}

#define CHARRNN_INSTANTIATE(Real)                                                               \
  template struct Parameters<Real>;                                                             \
  template struct LstmState<Real>;                                                              \
  template struct ForwardTape<Real>;                                                            \
  template Parameters<Real> init_parameters<Real>(const ModelConfig&, Rng&);                    \
  template Vector<Real> one_hot<Real>(TokenId, std::size_t);                                    \
  template LstmState<Real> initial_state(const Parameters<Real>&, const ModelConfig&,           \
                                         std::size_t);                                          \
  template LayerCache<Real> lstm_step(const Parameters<Real>&, std::size_t, const Matrix<Real>&, \
                                      const LayerState<Real>&);                                 \
  template LayerCache<Real> lstm_step(const Parameters<Real>&, std::size_t,                     \
                                      std::span<const TokenId>, const LayerState<Real>&);       \
  template void output_head(const Parameters<Real>&, const ModelConfig&, const Matrix<Real>&,   \
                            StepCache<Real>&);                                                  \
  template StepOutput<Real> forward_step(const Parameters<Real>&, const ModelConfig&, TokenId,  \
                                         const LstmState<Real>&);                               \
  template SequenceOutput<Real> forward_sequence(const Parameters<Real>&, const ModelConfig&,   \
                                                 std::span<const TokenId>,                      \
                                                 const LstmState<Real>&);                       \
  template SequenceOutput<Real> forward_lanes(const Parameters<Real>&, const ModelConfig&,      \
                                              const std::vector<std::vector<TokenId>>&,         \
                                              const LstmState<Real>&, const std::vector<bool>&); \
  template Matrix<Real> advance(const Parameters<Real>&, const ModelConfig&,                    \
                                std::span<const TokenId>, LstmState<Real>&, bool);

CHARRNN_INSTANTIATE(float)
CHARRNN_INSTANTIATE(double)
// Extended precision backs the finite-difference oracle.
CHARRNN_INSTANTIATE(long double)

#undef CHARRNN_INSTANTIATE

}  // namespace charrnn
