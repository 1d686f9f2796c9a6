// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

#include "charrnn/trainer.hpp"

#include <chrono>
#include <cmath>

#include "charrnn/errors.hpp"

namespace charrnn {

namespace {

struct SeededStreams {
  Rng init;
  Rng shift;
};

SeededStreams derive_streams(std::uint64_t seed) {
  Rng master(seed);
  Rng init = master.split();
  Rng shift = master.split();
  return {init, shift};
}

}  // namespace

template <std::floating_point Real>
Trainer<Real>::Trainer(const ModelConfig& model, const TrainConfig& train, const AdamConfig& adam,
                       Corpus train_set)
    : model_(model),
      train_(train),
      stream_(std::move(train_set), train.k1, train.k2, train.lanes, derive_streams(train.seed).shift) {
  model_.validate();
  train_.validate();
  AdamConfig opt = adam;
  opt.learning_rate = train_.learning_rate;
  opt.validate();
  Rng init_rng = derive_streams(train_.seed).init;
  params_ = init_parameters<Real>(model_, init_rng);
  adam_ = AdamState<Real>::zeros(model_, opt);
  lane_states_ = LaneStates<Real>::zeros(model_, train_.lanes);
}

template <std::floating_point Real>
Batch Trainer<Real>::peek_batch() const {
  const auto offsets =
      batch_offsets(stream_.index_in_epoch(), train_.k1, stream_.train().size(), train_.lanes);
  return make_batch(stream_.train(), offsets, train_.k2);
}

template <std::floating_point Real>
double Trainer<Real>::step() {
  const bool epoch_start = stream_.at_epoch_start();
  const Batch batch = stream_.next();
  double loss;
  if (train_.scheme == SchemeId::kScheme4) {
    if (epoch_start) lane_states_ = LaneStates<Real>::zeros(model_, train_.lanes);
    loss = train_step_scheme4(params_, model_, batch, lane_states_, adam_, train_);
  } else {
    loss = train_step_scheme123(params_, model_, batch, train_.loss_spec(), adam_, train_);
  }
  ++batches_done_;
  if (!std::isfinite(loss))
    throw NumericalError("non-finite training loss at batch " + std::to_string(batches_done_),
                         batches_done_);
  return loss;
}

template <std::floating_point Real>
std::vector<MetricsRecord> run_training(Trainer<Real>& trainer, const Corpus& test,
                                        const std::vector<std::size_t>& schedule,
                                        const MetricsSink& sink) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  std::vector<MetricsRecord> records;
  std::size_t next = 0;
  const std::size_t total = trainer.train_config().total_batches;
  while (trainer.batches_done() < total) {
    const double loss = trainer.step();
    const std::size_t done = trainer.batches_done();
    while (next < schedule.size() && schedule[next] < done) ++next;
    if (next < schedule.size() && schedule[next] == done) {
      MetricsRecord r;
      r.batch_index = done;
      r.sequences_seen = done * trainer.train_config().lanes;
      r.train_loss = loss;
      r.test_perplexity =
          perplexity(trainer.parameters(), trainer.model_config(), test, trainer.train_config().k2);
      r.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
      records.push_back(r);
      if (sink) sink(r);
      ++next;
    }
  }
  return records;
}

template class Trainer<float>;
template class Trainer<double>;
template std::vector<MetricsRecord> run_training(Trainer<float>&, const Corpus&,
                                                 const std::vector<std::size_t>&, const MetricsSink&);
template std::vector<MetricsRecord> run_training(Trainer<double>&, const Corpus&,
                                                 const std::vector<std::size_t>&, const MetricsSink&);

}  // namespace charrnn
