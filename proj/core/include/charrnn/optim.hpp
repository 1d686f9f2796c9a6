// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "charrnn/model.hpp"

namespace charrnn {

/// w <- w - lr * g for every scalar, learned initial state included.
template <std::floating_point Real>
void sgd_step(Parameters<Real>& params, const Gradients<Real>& grads, double learning_rate);

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

template <std::floating_point Real>
struct AdamState {
  AdamConfig config;
  Parameters<Real> m;
  Parameters<Real> v;
  std::uint64_t step = 0;

  static AdamState zeros(const ModelConfig& cfg, const AdamConfig& config);
};

/// Bias-corrected Adam. With `update_initial_state` false the h0/c0 tensors
/// and their moments are left untouched.
template <std::floating_point Real>
void adam_step(Parameters<Real>& params, const Gradients<Real>& grads, AdamState<Real>& state,
               bool update_initial_state = true);

}  // namespace charrnn
