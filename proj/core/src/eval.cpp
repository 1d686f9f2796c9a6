// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

#include "charrnn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "charrnn/bptt.hpp"

namespace charrnn {

std::size_t scored_token_count(std::size_t test_len, std::size_t k2) {
  if (test_len <= k2)
    throw std::invalid_argument("perplexity: test set of " + std::to_string(test_len) +
                                " tokens needs more than k2 = " + std::to_string(k2));
  return test_len - k2;
}

template <std::floating_point Real>
double perplexity(const Parameters<Real>& params, const ModelConfig& cfg, const Corpus& test,
                  std::size_t k2) {
  if (k2 == 0) throw std::invalid_argument("perplexity: k2 must be >= 1");
  const std::size_t scored = scored_token_count(test.size(), k2);
  LstmState<Real> state = initial_state(params, cfg);
  double nll = 0.0;
  // Feeding token t yields the distribution over token t + 1.
  for (std::size_t t = 0; t + 1 < test.size(); ++t) {
    const TokenId tok = test.tokens[t];
    const bool scoring = t + 1 >= k2;
    const Matrix<Real> y = advance(params, cfg, std::span<const TokenId>(&tok, 1), state, scoring);
    if (scoring) nll += cross_entropy<Real>(y.row(0), test.tokens[t + 1]);
  }
  return std::exp(nll / static_cast<double>(scored));
}

std::vector<std::size_t> eval_schedule(std::size_t total_batches, std::size_t points) {
  if (total_batches == 0) throw std::invalid_argument("eval_schedule: total_batches must be >= 1");
  const std::size_t count = std::max<std::size_t>(1, std::min(points, total_batches));
  std::vector<std::size_t> out;
  out.reserve(count);
  const double log_total = std::log(static_cast<double>(total_batches));
  for (std::size_t k = 0; k < count; ++k) {
    std::size_t index = total_batches;
    if (k + 1 < count) {
      const double x = std::exp(log_total * static_cast<double>(k) / static_cast<double>(count - 1));
      index = static_cast<std::size_t>(std::llround(x));
    }
    // Early log-spaced points round onto the same batch; push them forward
    // while leaving room for the remaining points.
    if (!out.empty()) index = std::max(index, out.back() + 1);
    index = std::min(index, total_batches - (count - 1 - k));
    out.push_back(std::max<std::size_t>(index, 1));
  }
  return out;
}

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_metrics_header(std::ostream& out) { out << kMetricsHeader << '\n'; }

void write_metrics_row(std::ostream& out, const MetricsRecord& r) {
  out << r.batch_index << ',' << r.sequences_seen << ',' << format_real(r.wall_ms) << ','
      << format_real(r.train_loss) << ',' << format_real(r.test_perplexity) << '\n';
}

template double perplexity(const Parameters<float>&, const ModelConfig&, const Corpus&, std::size_t);
template double perplexity(const Parameters<double>&, const ModelConfig&, const Corpus&, std::size_t);

}  // namespace charrnn
