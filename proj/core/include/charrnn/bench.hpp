// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

// Wall-clock harness for per-batch training cost and per-token sampling cost.

#pragma once

#include <cstddef>
#include <ostream>
#include <vector>

#include "charrnn/schemes.hpp"

namespace charrnn {

struct Architecture {
  std::size_t num_layers = 1;
  std::size_t hidden_size = 128;
};

/// Mean and spread of repeated wall-clock measurements in milliseconds.
struct Timing {
  double mean_ms = 0.0;
  double stddev_ms = 0.0;
  std::size_t samples = 0;

  double coefficient_of_variation() const { return mean_ms > 0.0 ? stddev_ms / mean_ms : 0.0; }
  static Timing from_samples(const std::vector<double>& ms);
};

struct BenchOptions {
  std::size_t warmup = 5;
  std::size_t iterations = 20;
  std::size_t sample_tokens = 20;  // tokens generated per sampling measurement
};

struct SampleTiming {
  Timing windowed;     // ms per token
  Timing progressive;  // ms per token
};

struct BenchResult {
  SchemeId scheme = SchemeId::kScheme1;
  Architecture arch;
  std::size_t k1 = 0;
  std::size_t k2 = 0;
  Timing train;   // ms per batch
  Timing sample;  // ms per token with the scheme's sampling method
};

/// Times train steps for each scheme in `schemes`, interleaving them round by
/// round so slow drift in machine speed affects all schemes alike. The first
/// `warmup` rounds are discarded.
template <std::floating_point Real>
std::vector<Timing> bench_train(const std::vector<SchemeId>& schemes, const Architecture& arch,
                                const TrainConfig& base, const Corpus& corpus,
                                std::size_t vocab_size, const BenchOptions& options);

/// Times windowed and progressive sampling on identical parameters.
template <std::floating_point Real>
SampleTiming bench_sample(const Parameters<Real>& params, const ModelConfig& cfg,
                          std::span<const TokenId> seed, std::size_t k2,
                          const BenchOptions& options);

/// Full table: every scheme on every architecture.
template <std::floating_point Real>
std::vector<BenchResult> bench_all(const std::vector<Architecture>& archs, const TrainConfig& base,
                                   const Corpus& corpus, std::size_t vocab_size,
                                   const BenchOptions& options);

inline constexpr const char* kBenchHeader =
    "scheme,num_layers,hidden_size,k1,k2,train_ms_per_batch,train_ms_stddev,sampling,"
    "sample_ms_per_token,sample_ms_stddev";

void write_bench_csv(std::ostream& out, const std::vector<BenchResult>& rows);

}  // namespace charrnn
