// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

// Stacked peephole LSTM -> leaky-ReLU dense -> softmax dense.
//
// Every state and activation matrix is laid out lanes x width, so a single
// sequence is the one-lane case of the batched code path.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "charrnn/numerics.hpp"

namespace charrnn {

using TokenId = std::uint32_t;

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t num_layers = 1;
  std::size_t hidden_size = 128;
  std::size_t dense_size = 1024;
  double leakiness = 0.01;

  /// Throws ConfigError when a count is zero or leakiness is negative.
  void validate() const;
  std::size_t input_size(std::size_t layer) const {
    return layer == 0 ? vocab_size : hidden_size;
  }
  bool operator==(const ModelConfig&) const = default;
};

enum Gate : std::size_t { kInputGate = 0, kForgetGate = 1, kCellGate = 2, kOutputGate = 3 };
inline constexpr std::size_t kNumGates = 4;
// Peephole slots: input, forget, output. The cell candidate has none.
inline constexpr std::array<Gate, 3> kPeepholeGates = {kInputGate, kForgetGate, kOutputGate};

template <std::floating_point Real>
struct LstmLayerParams {
  std::array<Matrix<Real>, kNumGates> input;      // hidden x input_size
  std::array<Matrix<Real>, kNumGates> recurrent;  // hidden x hidden
  std::array<Vector<Real>, 3> peephole;           // indexed like kPeepholeGates
  std::array<Vector<Real>, kNumGates> bias;
  Vector<Real> h0;
  Vector<Real> c0;

  bool operator==(const LstmLayerParams&) const = default;
};

template <std::floating_point Real>
struct DenseParams {
  Matrix<Real> weight;  // out x in
  Vector<Real> bias;

  bool operator==(const DenseParams&) const = default;
};

enum class TensorRole { kWeight, kInitialState };

template <typename T>
struct TensorRef {
  std::string name;
  std::span<T> values;
  TensorRole role;
};

/// All trainable tensors. Also used as the gradient container.
template <std::floating_point Real>
struct Parameters {
  std::vector<LstmLayerParams<Real>> layers;
  DenseParams<Real> hidden_dense;
  DenseParams<Real> output_dense;

  static Parameters zeros(const ModelConfig& cfg);

  /// Tensors in declaration order: per layer U_i,U_f,U_c,U_o, W_i..W_o,
  /// w_i,w_f,w_o, b_i..b_o, h0, c0; then dense1 W,b and dense2 W,b.
  std::vector<TensorRef<Real>> tensors();
  std::vector<TensorRef<const Real>> tensors() const;
  std::size_t parameter_count() const;
  /// Throws std::invalid_argument if shapes disagree with `cfg`.
  void check_shapes(const ModelConfig& cfg) const;

  bool operator==(const Parameters&) const = default;
};

template <std::floating_point Real>
using Gradients = Parameters<Real>;

template <std::floating_point Real>
struct LayerState {
  Matrix<Real> h;  // lanes x hidden
  Matrix<Real> c;
};

template <std::floating_point Real>
struct LstmState {
  std::vector<LayerState<Real>> layers;

  static LstmState zeros(const ModelConfig& cfg, std::size_t lanes = 1);
  std::size_t lanes() const { return layers.empty() ? 0 : layers.front().h.rows(); }
  LstmState lane(std::size_t j) const;
  void set_lane(std::size_t j, const LstmState& single);
};

template <std::floating_point Real>
struct LayerCache {
  Matrix<Real> i, f, g, o;  // post-activation gates; g is the tanh candidate
  Matrix<Real> c, h, tanh_c;
};

template <std::floating_point Real>
struct StepCache {
  std::vector<TokenId> tokens;  // one per lane
  std::vector<LayerCache<Real>> layers;
  bool has_output = false;
  Matrix<Real> dense_pre;  // lanes x dense_size
  Matrix<Real> dense_out;
  Matrix<Real> probs;      // lanes x vocab_size
};

template <std::floating_point Real>
struct ForwardTape {
  LstmState<Real> initial;
  std::vector<StepCache<Real>> steps;

  std::size_t length() const { return steps.size(); }
  std::size_t lanes() const { return initial.lanes(); }
  /// Recurrent state after processing step t (0-based).
  LstmState<Real> state_after(std::size_t t) const;
};

template <std::floating_point Real>
Parameters<Real> init_parameters(const ModelConfig& cfg, Rng& rng);

template <std::floating_point Real>
Vector<Real> one_hot(TokenId token, std::size_t size);

/// One LSTM layer step on a dense input (lanes x input_size).
template <std::floating_point Real>
LayerCache<Real> lstm_step(const Parameters<Real>& params, std::size_t layer,
                           const Matrix<Real>& x, const LayerState<Real>& state_in);

/// One LSTM layer step on one-hot inputs given as token ids; layer 0 only.
template <std::floating_point Real>
LayerCache<Real> lstm_step(const Parameters<Real>& params, std::size_t layer,
                           std::span<const TokenId> tokens, const LayerState<Real>& state_in);

/// Dense head on the top hidden state. Fills dense_pre, dense_out and probs.
template <std::floating_point Real>
void output_head(const Parameters<Real>& params, const ModelConfig& cfg, const Matrix<Real>& top_h,
                 StepCache<Real>& cache);

template <std::floating_point Real>
struct StepOutput {
  Vector<Real> y;
  LstmState<Real> state;
  StepCache<Real> cache;
};

/// Single-lane step: one-hot -> LSTM stack -> dense -> softmax.
template <std::floating_point Real>
StepOutput<Real> forward_step(const Parameters<Real>& params, const ModelConfig& cfg, TokenId token,
                              const LstmState<Real>& state_in);

template <std::floating_point Real>
struct SequenceOutput {
  ForwardTape<Real> tape;
  LstmState<Real> state;
};

/// Single-lane pass over `tokens`, computing the output head at every step.
template <std::floating_point Real>
SequenceOutput<Real> forward_sequence(const Parameters<Real>& params, const ModelConfig& cfg,
                                      std::span<const TokenId> tokens,
                                      const LstmState<Real>& state_in);

/// Batched pass. `inputs[lane][t]`; all lanes share one length. The head is
/// evaluated at step t only when `head_mask` is empty or head_mask[t] is set.
template <std::floating_point Real>
SequenceOutput<Real> forward_lanes(const Parameters<Real>& params, const ModelConfig& cfg,
                                   const std::vector<std::vector<TokenId>>& inputs,
                                   const LstmState<Real>& state_in,
                                   const std::vector<bool>& head_mask = {});

/// Inference step without a tape: advances `state` by one token per lane
/// and returns output probabilities (lanes x |V|) when `want_output`.
template <std::floating_point Real>
Matrix<Real> advance(const Parameters<Real>& params, const ModelConfig& cfg,
                     std::span<const TokenId> tokens, LstmState<Real>& state, bool want_output);

/// Learned (h0, c0) broadcast to `lanes` rows; always a copy.
template <std::floating_point Real>
LstmState<Real> initial_state(const Parameters<Real>& params, const ModelConfig& cfg,
                              std::size_t lanes = 1);

}  // namespace charrnn
