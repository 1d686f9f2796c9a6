// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

#include "charrnn/gradcheck.hpp"

#include <algorithm>

namespace charrnn {

namespace {

std::size_t draw_between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + rng.uniform_index(hi - lo + 1);
}

}  // namespace

bool GradcheckReport::passed() const {
  return std::all_of(trials.begin(), trials.end(), [](const GradcheckTrial& t) { return t.passed; });
}

GradcheckTrial gradcheck_trial(const ModelConfig& model, std::size_t lanes, std::size_t seq_len,
                               const LossSpec& loss, Rng& rng, double epsilon, double tolerance) {
  Parameters<double> params = init_parameters<double>(model, rng);
  for (auto& t : params.tensors())
    for (double& v : t.values) v += 0.5 * rng.normal();

  std::vector<std::vector<TokenId>> inputs(lanes), targets(lanes);
  for (std::size_t j = 0; j < lanes; ++j)
    for (std::size_t t = 0; t < seq_len; ++t) {
      inputs[j].push_back(static_cast<TokenId>(rng.uniform_index(model.vocab_size)));
      targets[j].push_back(static_cast<TokenId>(rng.uniform_index(model.vocab_size)));
    }
  const auto weights = loss_weights(seq_len, loss);
  const auto fwd = forward_lanes(params, model, inputs, initial_state(params, model, lanes));
  const auto analytic = backward(params, model, fwd.tape, targets, weights);
  const auto numeric = finite_diff_gradient(params, model, inputs, targets, weights, epsilon);

  GradcheckTrial trial;
  trial.model = model;
  trial.lanes = lanes;
  trial.seq_len = seq_len;
  trial.loss = loss;
  trial.comparison = compare_gradients(analytic.grads, numeric);
  trial.passed = trial.comparison.max_relative_error < tolerance;
  return trial;
}

GradcheckReport run_gradcheck(std::size_t trials, std::uint64_t seed, double epsilon,
                              double tolerance, const GradcheckLimits& limits) {
  Rng rng(seed);
  GradcheckReport report;
  for (std::size_t n = 0; n < trials; ++n) {
    ModelConfig model;
    model.vocab_size = draw_between(rng, 2, limits.max_vocab);
    model.hidden_size = draw_between(rng, 1, limits.max_hidden);
    model.num_layers = draw_between(rng, 1, limits.max_layers);
    model.dense_size = draw_between(rng, 2, limits.max_dense);
    const std::size_t lanes = draw_between(rng, 1, limits.max_lanes);
    const std::size_t seq_len = draw_between(rng, 1, limits.max_seq_len);
    LossSpec loss;
    loss.window = draw_between(rng, 1, seq_len);
    loss.decay = static_cast<LossDecay>(rng.uniform_index(3));
    Rng trial_rng = rng.split();
    report.trials.push_back(
        gradcheck_trial(model, lanes, seq_len, loss, trial_rng, epsilon, tolerance));
    report.worst_relative_error =
        std::max(report.worst_relative_error, report.trials.back().comparison.max_relative_error);
  }
  return report;
}

}  // namespace charrnn
