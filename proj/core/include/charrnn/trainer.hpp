// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "charrnn/eval.hpp"
#include "charrnn/schemes.hpp"

namespace charrnn {

/// Owns parameters, optimizer state, scheme-4 lane states and the batch
/// stream for one training run. Everything random derives from train.seed.
template <std::floating_point Real>
class Trainer {
 public:
  Trainer(const ModelConfig& model, const TrainConfig& train, const AdamConfig& adam,
          Corpus train_set);

  /// Trains on one batch and returns its loss. Throws NumericalError on a
  /// non-finite loss.
  double step();

  std::size_t batches_done() const { return batches_done_; }
  const ModelConfig& model_config() const { return model_; }
  const TrainConfig& train_config() const { return train_; }
  const Parameters<Real>& parameters() const { return params_; }
  Parameters<Real>& parameters() { return params_; }
  const LaneStates<Real>& lane_states() const { return lane_states_; }
  const BatchStream& stream() const { return stream_; }
  /// Batch that the next step() will consume (without consuming it).
  Batch peek_batch() const;

 private:
  ModelConfig model_;
  TrainConfig train_;
  Parameters<Real> params_;
  AdamState<Real> adam_;
  LaneStates<Real> lane_states_;
  BatchStream stream_;
  std::size_t batches_done_ = 0;
};

using MetricsSink = std::function<void(const MetricsRecord&)>;

/// Runs trainer.step() up to train.total_batches, evaluating test perplexity
/// after every batch index in `schedule`.
template <std::floating_point Real>
std::vector<MetricsRecord> run_training(Trainer<Real>& trainer, const Corpus& test,
                                        const std::vector<std::size_t>& schedule,
                                        const MetricsSink& sink = {});

}  // namespace charrnn
