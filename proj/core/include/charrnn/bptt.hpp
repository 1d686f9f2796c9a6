// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

// Reverse pass over a ForwardTape: weighted cross-entropy, truncated
// backpropagation through time, clipping, and the finite-difference oracle.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "charrnn/model.hpp"

namespace charrnn {

enum class LossDecay { kNone, kLinear, kExponential };

/// Which output positions carry loss. `window` is the number of trailing
/// positions that contribute (1 = last only, seq_len = all).
struct LossSpec {
  std::size_t window = 1;
  LossDecay decay = LossDecay::kNone;
};

/// -ln y[target].
template <std::floating_point Real>
double cross_entropy(std::span<const Real> y, TokenId target);

/// Per-position weights summing to 1. Throws std::invalid_argument if the
/// window is zero or longer than the sequence.
std::vector<double> loss_weights(std::size_t seq_len, const LossSpec& spec);

struct BackwardOptions {
  /// Backpropagation horizon; the tape may not be longer. nullopt = unbounded.
  std::optional<std::size_t> horizon;
  /// Clamp gate pre-activation gradients at every step (off by default).
  bool clip_cell_gradients = false;
  double cell_clip = 50.0;
};

template <std::floating_point Real>
struct BackwardResult {
  Gradients<Real> grads;  // h0/c0 slots hold the lane sum of initial_state_grad
  double loss = 0.0;
  LstmState<Real> initial_state_grad;
};

/// Exact gradient of
///   loss = (1/lanes) * sum_lanes sum_t weights[t] * CE(y[lane][t], targets[lane][t])
/// over the recorded tape. Every position with a nonzero weight must have its
/// output head recorded.
template <std::floating_point Real>
BackwardResult<Real> backward(const Parameters<Real>& params, const ModelConfig& cfg,
                              const ForwardTape<Real>& tape,
                              const std::vector<std::vector<TokenId>>& targets,
                              std::span<const double> weights, const BackwardOptions& options = {});

/// Single-lane convenience overload.
template <std::floating_point Real>
BackwardResult<Real> backward(const Parameters<Real>& params, const ModelConfig& cfg,
                              const ForwardTape<Real>& tape, std::span<const TokenId> targets,
                              std::span<const double> weights, const BackwardOptions& options = {});

/// Forward-only value of the same weighted loss.
template <std::floating_point Real>
double sequence_loss(const Parameters<Real>& params, const ModelConfig& cfg,
                     const std::vector<std::vector<TokenId>>& inputs,
                     const std::vector<std::vector<TokenId>>& targets,
                     std::span<const double> weights, const LstmState<Real>& state_in);

/// Clamps every entry to [-threshold, threshold].
template <std::floating_point Real>
void clip_elementwise(Gradients<Real>& grads, double threshold);

enum class FiniteDiffPrecision { kDouble, kExtended };

/// Central differences of the weighted loss, starting every evaluation from
/// the learned initial state so h0/c0 are differentiated too. Loss values are
/// computed in `precision`; extended precision keeps the rounding noise of
/// (L(w+e) - L(w-e)) / 2e far below gradient entries of order 1e-8.
Gradients<double> finite_diff_gradient(const Parameters<double>& params, const ModelConfig& cfg,
                                       const std::vector<std::vector<TokenId>>& inputs,
                                       const std::vector<std::vector<TokenId>>& targets,
                                       std::span<const double> weights, double epsilon,
                                       FiniteDiffPrecision precision = FiniteDiffPrecision::kExtended);

struct GradientComparison {
  double max_relative_error = 0.0;
  std::size_t compared = 0;
  std::size_t skipped = 0;  // both magnitudes below the floor
};

/// max |a-b| / max(|a|,|b|) over entries where either magnitude >= floor.
GradientComparison compare_gradients(const Gradients<double>& analytic,
                                     const Gradients<double>& numeric, double floor = 1e-8);

}  // namespace charrnn
