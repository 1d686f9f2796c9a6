// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

// The four training/sampling schemes:
//   1: multi-loss training       + windowed sampling
//   2: single-loss training      + windowed sampling
//   3: multi-loss training       + progressive sampling
//   4: conditional multi-loss    + progressive sampling
//
// Schemes 1-3 start every sequence from the learned initial state and train
// it with the weights. Scheme 4 carries one recurrent state per lane from
// batch to batch (captured after k1 tokens) and treats it as a constant.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "charrnn/bptt.hpp"
#include "charrnn/data.hpp"
#include "charrnn/optim.hpp"

namespace charrnn {

enum class SchemeId { kScheme1 = 1, kScheme2 = 2, kScheme3 = 3, kScheme4 = 4 };
enum class SamplingMethod { kWindowed, kProgressive };
enum class DrawMode { kMultinomial, kGreedy };

SchemeId parse_scheme(std::string_view text);
SamplingMethod default_sampling(SchemeId scheme);
std::string to_string(SchemeId scheme);
std::string to_string(SamplingMethod method);
std::string to_string(DrawMode mode);
std::string to_string(LossDecay decay);

struct TrainConfig {
  SchemeId scheme = SchemeId::kScheme1;
  std::size_t k1 = 20;
  std::size_t k2 = 100;
  std::size_t lanes = kDefaultLanes;
  std::size_t total_batches = 12800;
  double learning_rate = 0.001;
  double clip = 50.0;
  bool clip_cell_gradients = false;
  /// Loss window; nullopt means the scheme default (1 for scheme 2, k2 otherwise).
  std::optional<std::size_t> loss_window;
  LossDecay decay = LossDecay::kNone;
  std::uint64_t seed = 0;

  /// Throws ConfigError on k1 > k2, zero counts, or a loss window
  /// inconsistent with the scheme.
  void validate() const;
  LossSpec loss_spec() const;
};

/// One recurrent state per lane, carried between scheme-4 batches.
template <std::floating_point Real>
using LaneStates = LstmState<Real>;

/// Schemes 1-3: forward from the learned initial state, weighted loss,
/// backward, clip, Adam on weights and h0/c0.
template <std::floating_point Real>
double train_step_scheme123(Parameters<Real>& params, const ModelConfig& cfg, const Batch& batch,
                            const LossSpec& loss, AdamState<Real>& opt, const TrainConfig& train);

/// Scheme 4: forward from the carried lane states; the state after k1 tokens
/// replaces `lane_states`. Gradients stop at the carried-in state and h0/c0
/// are not optimized.
template <std::floating_point Real>
double train_step_scheme4(Parameters<Real>& params, const ModelConfig& cfg, const Batch& batch,
                          LaneStates<Real>& lane_states, AdamState<Real>& opt,
                          const TrainConfig& train);

/// Multinomial: inverse-CDF draw. Greedy: argmax, lowest index on ties.
template <std::floating_point Real>
TokenId draw_token(std::span<const Real> y, Rng& rng, DrawMode mode);

/// Re-runs the last k2 tokens from the learned initial state for every
/// generated token. Returns seed followed by n new tokens.
template <std::floating_point Real>
std::vector<TokenId> sample_windowed(const Parameters<Real>& params, const ModelConfig& cfg,
                                     std::span<const TokenId> seed, std::size_t n, std::size_t k2,
                                     Rng& rng, DrawMode mode);

/// Feeds the seed once from the learned initial state, then feeds back each
/// drawn token without ever resetting the state.
template <std::floating_point Real>
std::vector<TokenId> sample_progressive(const Parameters<Real>& params, const ModelConfig& cfg,
                                        std::span<const TokenId> seed, std::size_t n, Rng& rng,
                                        DrawMode mode);

}  // namespace charrnn
