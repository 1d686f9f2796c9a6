// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "charrnn/data.hpp"
#include "charrnn/model.hpp"

namespace charrnn {

inline constexpr std::size_t kDefaultEvalPoints = 40;

/// One continuous pass over `test` from the learned initial state. The first
/// k2 tokens only condition the state; the remaining len - k2 tokens are
/// scored. Returns exp(mean negative log-likelihood).
template <std::floating_point Real>
double perplexity(const Parameters<Real>& params, const ModelConfig& cfg, const Corpus& test,
                  std::size_t k2);

/// Number of tokens perplexity() scores.
std::size_t scored_token_count(std::size_t test_len, std::size_t k2);

/// min(points, total_batches) strictly increasing batch indices in
/// [1, total_batches], log-spaced where rounding allows; both endpoints
/// always present.
std::vector<std::size_t> eval_schedule(std::size_t total_batches,
                                       std::size_t points = kDefaultEvalPoints);

struct MetricsRecord {
  std::size_t batch_index = 0;
  std::size_t sequences_seen = 0;
  double wall_ms = 0.0;
  double train_loss = 0.0;
  double test_perplexity = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "batch_index,sequences_seen,wall_ms,train_loss,test_perplexity";

/// Formats a real with 17 significant digits.
std::string format_real(double value);
void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const MetricsRecord& record);

}  // namespace charrnn
