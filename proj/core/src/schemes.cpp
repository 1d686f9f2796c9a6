// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

#include "charrnn/schemes.hpp"

#include <stdexcept>

#include "charrnn/errors.hpp"

namespace charrnn {

SchemeId parse_scheme(std::string_view text) {
  if (text == "1" || text == "scheme1") return SchemeId::kScheme1;
  if (text == "2" || text == "scheme2") return SchemeId::kScheme2;
  if (text == "3" || text == "scheme3") return SchemeId::kScheme3;
  if (text == "4" || text == "scheme4") return SchemeId::kScheme4;
  throw ConfigError("unknown scheme '" + std::string(text) + "' (expected 1, 2, 3 or 4)");
}

SamplingMethod default_sampling(SchemeId scheme) {
  return scheme == SchemeId::kScheme1 || scheme == SchemeId::kScheme2 ? SamplingMethod::kWindowed
                                                                      : SamplingMethod::kProgressive;
}

std::string to_string(SchemeId scheme) { return std::to_string(static_cast<int>(scheme)); }

std::string to_string(SamplingMethod method) {
  return method == SamplingMethod::kWindowed ? "windowed" : "progressive";
}

std::string to_string(DrawMode mode) { return mode == DrawMode::kGreedy ? "greedy" : "multinomial"; }

std::string to_string(LossDecay decay) {
  switch (decay) {
    case LossDecay::kNone:
      return "none";
    case LossDecay::kLinear:
      return "linear";
    case LossDecay::kExponential:
      return "exponential";
  }
  return "none";
}

void TrainConfig::validate() const {
  if (k1 == 0 || k2 == 0) throw ConfigError("k1 and k2 must be >= 1");
  if (k1 > k2)
    throw ConfigError("k1 (" + std::to_string(k1) + ") must not exceed k2 (" + std::to_string(k2) +
                      "): with k1 > k2 training would skip data");
  if (lanes == 0) throw ConfigError("lanes must be >= 1");
  if (total_batches == 0) throw ConfigError("total_batches must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(clip > 0.0)) throw ConfigError("clip must be > 0");
  if (loss_window) {
    if (*loss_window == 0 || *loss_window > k2)
      throw ConfigError("k3 (" + std::to_string(*loss_window) + ") must lie in [1, k2=" +
                        std::to_string(k2) + "]");
    if (scheme == SchemeId::kScheme2 && *loss_window != 1)
      throw ConfigError("scheme 2 is single-loss training and requires k3 = 1");
  }
}

LossSpec TrainConfig::loss_spec() const {
  const std::size_t window = loss_window ? *loss_window : (scheme == SchemeId::kScheme2 ? 1 : k2);
  return {window, decay};
}

namespace {

std::vector<bool> head_mask_for(std::span<const double> weights) {
  std::vector<bool> mask(weights.size());
  for (std::size_t t = 0; t < weights.size(); ++t) mask[t] = weights[t] != 0.0;
  return mask;
}

BackwardOptions backward_options(const TrainConfig& train) {
  BackwardOptions o;
  o.horizon = train.k2;
  o.clip_cell_gradients = train.clip_cell_gradients;
  o.cell_clip = train.clip;
  return o;
}

}  // namespace

template <std::floating_point Real>
double train_step_scheme123(Parameters<Real>& params, const ModelConfig& cfg, const Batch& batch,
                            const LossSpec& loss, AdamState<Real>& opt, const TrainConfig& train) {
  if (batch.length() != train.k2)
    throw std::invalid_argument("train_step: batch length " + std::to_string(batch.length()) +
                                " != k2 " + std::to_string(train.k2));
  const auto weights = loss_weights(batch.length(), loss);
  const auto start = initial_state(params, cfg, batch.lanes());
  const auto fwd = forward_lanes(params, cfg, batch.inputs, start, head_mask_for(weights));
  auto result = backward(params, cfg, fwd.tape, batch.targets, weights, backward_options(train));
  clip_elementwise(result.grads, train.clip);
  adam_step(params, result.grads, opt, /*update_initial_state=*/true);
  return result.loss;
}

template <std::floating_point Real>
double train_step_scheme4(Parameters<Real>& params, const ModelConfig& cfg, const Batch& batch,
                          LaneStates<Real>& lane_states, AdamState<Real>& opt,
                          const TrainConfig& train) {
  if (batch.length() != train.k2)
    throw std::invalid_argument("train_step: batch length " + std::to_string(batch.length()) +
                                " != k2 " + std::to_string(train.k2));
  if (lane_states.lanes() != batch.lanes())
    throw std::invalid_argument("train_step_scheme4: " + std::to_string(lane_states.lanes()) +
                                " lane states for a batch of " + std::to_string(batch.lanes()));
  const auto weights = loss_weights(batch.length(), train.loss_spec());
  const auto fwd = forward_lanes(params, cfg, batch.inputs, lane_states, head_mask_for(weights));
  lane_states = fwd.tape.state_after(train.k1 - 1);
  auto result = backward(params, cfg, fwd.tape, batch.targets, weights, backward_options(train));
  clip_elementwise(result.grads, train.clip);
  adam_step(params, result.grads, opt, /*update_initial_state=*/false);
  return result.loss;
}

template <std::floating_point Real>
TokenId draw_token(std::span<const Real> y, Rng& rng, DrawMode mode) {
  if (y.empty()) throw std::invalid_argument("draw_token: empty distribution");
  if (mode == DrawMode::kGreedy) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < y.size(); ++k)
      if (y[k] > y[best]) best = k;
    return static_cast<TokenId>(best);
  }
  const double u = rng.uniform01();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (y[k] <= Real(0)) continue;
    last_positive = k;
    cumulative += static_cast<double>(y[k]);
    if (u < cumulative) return static_cast<TokenId>(k);
  }
  // Rounding left the cumulative sum just below u.
  return static_cast<TokenId>(last_positive);
}

template <std::floating_point Real>
std::vector<TokenId> sample_windowed(const Parameters<Real>& params, const ModelConfig& cfg,
                                     std::span<const TokenId> seed, std::size_t n, std::size_t k2,
                                     Rng& rng, DrawMode mode) {
  if (k2 == 0) throw std::invalid_argument("sample_windowed: k2 must be >= 1");
  if (seed.size() < k2)
    throw std::invalid_argument("sample_windowed: seed of " + std::to_string(seed.size()) +
                                " tokens is shorter than k2 = " + std::to_string(k2));
  std::vector<TokenId> out(seed.begin(), seed.end());
  out.reserve(seed.size() + n);
  for (std::size_t step = 0; step < n; ++step) {
    LstmState<Real> state = initial_state(params, cfg);
    Matrix<Real> y;
    const std::size_t begin = out.size() - k2;
    for (std::size_t t = begin; t < out.size(); ++t) {
      const TokenId tok = out[t];
      y = advance(params, cfg, std::span<const TokenId>(&tok, 1), state, t + 1 == out.size());
    }
    out.push_back(draw_token<Real>(y.row(0), rng, mode));
  }
  return out;
}

template <std::floating_point Real>
std::vector<TokenId> sample_progressive(const Parameters<Real>& params, const ModelConfig& cfg,
                                        std::span<const TokenId> seed, std::size_t n, Rng& rng,
                                        DrawMode mode) {
  if (seed.empty()) throw std::invalid_argument("sample_progressive: empty seed");
  std::vector<TokenId> out(seed.begin(), seed.end());
  if (n == 0) return out;
  out.reserve(seed.size() + n);
  LstmState<Real> state = initial_state(params, cfg);
  Matrix<Real> y;
  for (std::size_t t = 0; t < seed.size(); ++t) {
    const TokenId tok = seed[t];
    y = advance(params, cfg, std::span<const TokenId>(&tok, 1), state, t + 1 == seed.size());
  }
  for (std::size_t step = 0; step < n; ++step) {
    const TokenId tok = draw_token<Real>(y.row(0), rng, mode);
    out.push_back(tok);
    if (step + 1 < n) y = advance(params, cfg, std::span<const TokenId>(&tok, 1), state, true);
  }
  return out;
}

#define CHARRNN_INSTANTIATE(Real)                                                               \
  template double train_step_scheme123(Parameters<Real>&, const ModelConfig&, const Batch&,      \
                                       const LossSpec&, AdamState<Real>&, const TrainConfig&);  \
  template double train_step_scheme4(Parameters<Real>&, const ModelConfig&, const Batch&,        \
                                     LaneStates<Real>&, AdamState<Real>&, const TrainConfig&);  \
  template TokenId draw_token<Real>(std::span<const Real>, Rng&, DrawMode);                     \
  template std::vector<TokenId> sample_windowed(const Parameters<Real>&, const ModelConfig&,     \
                                                std::span<const TokenId>, std::size_t,          \
                                                std::size_t, Rng&, DrawMode);                   \
  template std::vector<TokenId> sample_progressive(const Parameters<Real>&, const ModelConfig&,  \
                                                   std::span<const TokenId>, std::size_t, Rng&, \
                                                   DrawMode);

CHARRNN_INSTANTIATE(float)
CHARRNN_INSTANTIATE(double)

#undef CHARRNN_INSTANTIATE

}  // namespace charrnn
