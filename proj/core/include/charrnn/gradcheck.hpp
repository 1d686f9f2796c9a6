// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

// Randomized agreement check between backward() and central differences.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "charrnn/bptt.hpp"

namespace charrnn {

struct GradcheckLimits {
  std::size_t max_vocab = 8;
  std::size_t max_hidden = 8;
  std::size_t max_layers = 2;
  std::size_t max_seq_len = 10;
  std::size_t max_lanes = 3;
  std::size_t max_dense = 12;
};

struct GradcheckTrial {
  ModelConfig model;
  std::size_t lanes = 1;
  std::size_t seq_len = 1;
  LossSpec loss;
  GradientComparison comparison;
  bool passed = false;
};

struct GradcheckReport {
  std::vector<GradcheckTrial> trials;
  double worst_relative_error = 0.0;
  bool passed() const;
};

/// One trial on a given configuration. Every tensor, including biases,
/// peepholes and h0/c0, is randomized so no gradient path is trivially zero.
GradcheckTrial gradcheck_trial(const ModelConfig& model, std::size_t lanes, std::size_t seq_len,
                               const LossSpec& loss, Rng& rng, double epsilon, double tolerance);

/// `trials` random tiny configurations drawn within `limits`.
GradcheckReport run_gradcheck(std::size_t trials, std::uint64_t seed, double epsilon = 1e-5,
                              double tolerance = 1e-4, const GradcheckLimits& limits = {});

}  // namespace charrnn
