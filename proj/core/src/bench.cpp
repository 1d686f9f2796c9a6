// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

#include "charrnn/bench.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "charrnn/eval.hpp"

namespace charrnn {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// One independent training setup per scheme: own parameters, optimizer and
// lane states, all from the same seed.
template <std::floating_point Real>
struct SchemeRig {
  TrainConfig train;
  Parameters<Real> params;
  AdamState<Real> adam;
  LaneStates<Real> lanes;
  std::size_t next_batch = 0;
};

}  // namespace

Timing Timing::from_samples(const std::vector<double>& ms) {
  Timing t;
  t.samples = ms.size();
  if (ms.empty()) return t;
  double sum = 0.0;
  for (double x : ms) sum += x;
  t.mean_ms = sum / static_cast<double>(ms.size());
  double var = 0.0;
  for (double x : ms) var += (x - t.mean_ms) * (x - t.mean_ms);
  t.stddev_ms = ms.size() > 1 ? std::sqrt(var / static_cast<double>(ms.size() - 1)) : 0.0;
  return t;
}

template <std::floating_point Real>
std::vector<Timing> bench_train(const std::vector<SchemeId>& schemes, const Architecture& arch,
                                const TrainConfig& base, const Corpus& corpus,
                                std::size_t vocab_size, const BenchOptions& options) {
  if (options.iterations < 1) throw std::invalid_argument("bench_train: iterations must be >= 1");
  const ModelConfig cfg{vocab_size, arch.num_layers, arch.hidden_size};
  std::vector<SchemeRig<Real>> rigs;
  for (SchemeId s : schemes) {
    SchemeRig<Real> rig;
    rig.train = base;
    rig.train.scheme = s;
    rig.train.loss_window.reset();
    rig.train.validate();
    Rng rng(base.seed);
    rig.params = init_parameters<Real>(cfg, rng);
    AdamConfig adam;
    adam.learning_rate = base.learning_rate;
    rig.adam = AdamState<Real>::zeros(cfg, adam);
    rig.lanes = LaneStates<Real>::zeros(cfg, base.lanes);
    rigs.push_back(std::move(rig));
  }
  std::vector<std::vector<double>> samples(schemes.size());
  const std::size_t rounds = options.warmup + options.iterations;
  for (std::size_t round = 0; round < rounds; ++round) {
    for (std::size_t s = 0; s < rigs.size(); ++s) {
      auto& rig = rigs[s];
      const auto offsets = batch_offsets(rig.next_batch++, rig.train.k1, corpus.size(), rig.train.lanes);
      const Batch batch = make_batch(corpus, offsets, rig.train.k2);
      const auto start = Clock::now();
      if (rig.train.scheme == SchemeId::kScheme4)
        train_step_scheme4(rig.params, cfg, batch, rig.lanes, rig.adam, rig.train);
      else
        train_step_scheme123(rig.params, cfg, batch, rig.train.loss_spec(), rig.adam, rig.train);
      const double ms = elapsed_ms(start);
      if (round >= options.warmup) samples[s].push_back(ms);
    }
  }
  std::vector<Timing> out;
  for (const auto& s : samples) out.push_back(Timing::from_samples(s));
  return out;
}

template <std::floating_point Real>
SampleTiming bench_sample(const Parameters<Real>& params, const ModelConfig& cfg,
                          std::span<const TokenId> seed, std::size_t k2,
                          const BenchOptions& options) {
  if (options.iterations < 1 || options.sample_tokens < 1)
    throw std::invalid_argument("bench_sample: iterations and sample_tokens must be >= 1");
  if (seed.size() < k2) throw std::invalid_argument("bench_sample: seed shorter than k2");
  const auto window = seed.subspan(seed.size() - k2);
  std::vector<double> windowed, progressive;
  const double n = static_cast<double>(options.sample_tokens);
  for (std::size_t round = 0; round < options.warmup + options.iterations; ++round) {
    Rng rng_w(round), rng_p(round);
    auto start = Clock::now();
    sample_windowed(params, cfg, window, options.sample_tokens, k2, rng_w, DrawMode::kMultinomial);
    const double w_ms = elapsed_ms(start) / n;
    // Progressive sampling bootstraps on the seed once; only the per-token
    // phase is charged, matching the windowed per-token cost it replaces.
    LstmState<Real> state = initial_state(params, cfg);
    Matrix<Real> y;
    for (std::size_t t = 0; t < window.size(); ++t)
      y = advance(params, cfg, window.subspan(t, 1), state, t + 1 == window.size());
    start = Clock::now();
    for (std::size_t k = 0; k < options.sample_tokens; ++k) {
      const TokenId tok = draw_token<Real>(y.row(0), rng_p, DrawMode::kMultinomial);
      y = advance(params, cfg, std::span<const TokenId>(&tok, 1), state, true);
    }
    const double p_ms = elapsed_ms(start) / n;
    if (round >= options.warmup) {
      windowed.push_back(w_ms);
      progressive.push_back(p_ms);
    }
  }
  return {Timing::from_samples(windowed), Timing::from_samples(progressive)};
}

template <std::floating_point Real>
std::vector<BenchResult> bench_all(const std::vector<Architecture>& archs, const TrainConfig& base,
                                   const Corpus& corpus, std::size_t vocab_size,
                                   const BenchOptions& options) {
  const std::vector<SchemeId> schemes = {SchemeId::kScheme1, SchemeId::kScheme2, SchemeId::kScheme3,
                                         SchemeId::kScheme4};
  std::vector<BenchResult> rows;
  for (const auto& arch : archs) {
    const auto train = bench_train<Real>(schemes, arch, base, corpus, vocab_size, options);
    const ModelConfig cfg{vocab_size, arch.num_layers, arch.hidden_size};
    Rng rng(base.seed);
    const auto params = init_parameters<Real>(cfg, rng);
    const std::size_t seed_len = std::min(corpus.size(), base.k2);
    const auto sample = bench_sample(params, cfg, std::span<const TokenId>(corpus.tokens).first(seed_len),
                                     base.k2, options);
    for (std::size_t s = 0; s < schemes.size(); ++s) {
      BenchResult r;
      r.scheme = schemes[s];
      r.arch = arch;
      r.k1 = base.k1;
      r.k2 = base.k2;
      r.train = train[s];
      r.sample = default_sampling(schemes[s]) == SamplingMethod::kWindowed ? sample.windowed
                                                                           : sample.progressive;
      rows.push_back(r);
    }
  }
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchResult>& rows) {
  out << kBenchHeader << '\n';
  for (const auto& r : rows) {
    out << to_string(r.scheme) << ',' << r.arch.num_layers << ',' << r.arch.hidden_size << ','
        << r.k1 << ',' << r.k2 << ',' << format_real(r.train.mean_ms) << ','
        << format_real(r.train.stddev_ms) << ',' << to_string(default_sampling(r.scheme)) << ','
        << format_real(r.sample.mean_ms) << ',' << format_real(r.sample.stddev_ms) << '\n';
  }
}

#define CHARRNN_INSTANTIATE(Real)                                                                \
  template std::vector<Timing> bench_train<Real>(const std::vector<SchemeId>&,                    \
                                                 const Architecture&, const TrainConfig&,        \
                                                 const Corpus&, std::size_t, const BenchOptions&); \
  template SampleTiming bench_sample(const Parameters<Real>&, const ModelConfig&,                \
                                     std::span<const TokenId>, std::size_t, const BenchOptions&); \
  template std::vector<BenchResult> bench_all<Real>(const std::vector<Architecture>&,             \
                                                    const TrainConfig&, const Corpus&,           \
                                                    std::size_t, const BenchOptions&);

CHARRNN_INSTANTIATE(float)
CHARRNN_INSTANTIATE(double)

#undef CHARRNN_INSTANTIATE

}  // namespace charrnn
