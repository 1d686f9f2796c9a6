// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "charrnn/model.hpp"
#include "test_util.hpp"

namespace charrnn {
namespace {

using testing::random_parameters;

// Scalar re-implementation of one peephole LSTM layer step, written with
// plain loops and std::exp so it shares no code with the library kernels.
struct ScalarState {
  std::vector<double> h, c;
};

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

ScalarState scalar_lstm(const LstmLayerParams<double>& p, const std::vector<double>& x,
                        const ScalarState& s) {
  const std::size_t n = s.h.size();
  auto pre = [&](int gate, std::size_t r) {
    double a = p.bias[gate][r];
    for (std::size_t k = 0; k < x.size(); ++k) a += p.input[gate](r, k) * x[k];
    for (std::size_t k = 0; k < n; ++k) a += p.recurrent[gate](r, k) * s.h[k];
    return a;
  };
  ScalarState out{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t r = 0; r < n; ++r) {
    const double i = sig(pre(kInputGate, r) + p.peephole[0][r] * s.c[r]);
    const double f = sig(pre(kForgetGate, r) + p.peephole[1][r] * s.c[r]);
    const double g = std::tanh(pre(kCellGate, r));
    const double o = sig(pre(kOutputGate, r) + p.peephole[2][r] * s.c[r]);
    out.c[r] = f * s.c[r] + i * g;
    out.h[r] = o * std::tanh(out.c[r]);
  }
  return out;
}

std::vector<double> scalar_head(const Parameters<double>& p, const ModelConfig& cfg,
                                const std::vector<double>& h) {
  std::vector<double> d(cfg.dense_size);
  for (std::size_t r = 0; r < d.size(); ++r) {
    double a = p.hidden_dense.bias[r];
    for (std::size_t k = 0; k < h.size(); ++k) a += p.hidden_dense.weight(r, k) * h[k];
    d[r] = a >= 0 ? a : cfg.leakiness * a;
  }
  std::vector<double> z(cfg.vocab_size);
  double zmax = -1e300;
  for (std::size_t r = 0; r < z.size(); ++r) {
    double a = p.output_dense.bias[r];
    for (std::size_t k = 0; k < d.size(); ++k) a += p.output_dense.weight(r, k) * d[k];
    z[r] = a;
    zmax = std::max(zmax, a);
  }
  double sum = 0.0;
  for (double& v : z) sum += (v = std::exp(v - zmax));
  for (double& v : z) v /= sum;
  return z;
}

TEST(ModelConfig, RejectsZeroCounts) {
  EXPECT_THROW((ModelConfig{0, 1, 8, 8}.validate()), std::exception);
  EXPECT_THROW((ModelConfig{5, 0, 8, 8}.validate()), std::exception);
  EXPECT_THROW((ModelConfig{5, 1, 0, 8}.validate()), std::exception);
  EXPECT_THROW((ModelConfig{5, 1, 8, 8, -0.1}.validate()), std::exception);
  EXPECT_NO_THROW((ModelConfig{5, 1, 8, 8}.validate()));
}

TEST(InitParameters, CountMatchesShapeSum) {
  const ModelConfig cfg{85, 1, 512, 1024};
  Rng rng(0);
  const auto p = init_parameters<float>(cfg, rng);
  const std::size_t g = 512, v = 85;
  // Summed from the declared shapes: U (4 gamma x V), W (4 gamma^2),
  // biases (4 gamma), peepholes (3 gamma), h0 and c0 (2 gamma), two dense layers.
  const std::size_t expected =
      4 * g * v + 4 * g * g + 4 * g + 3 * g + 2 * g + (1024 * g + 1024) + (v * 1024 + v);
  EXPECT_EQ(p.parameter_count(), expected);
  EXPECT_EQ(p.parameter_count(), 1839701u);
}

TEST(InitParameters, CountForStackedLayers) {
  const ModelConfig cfg{10, 3, 6, 7};
  const auto p = Parameters<double>::zeros(cfg);
  const std::size_t g = 6;
  const std::size_t lstm0 = 4 * g * 10 + 4 * g * g + 9 * g;
  const std::size_t lstm_upper = 4 * g * g + 4 * g * g + 9 * g;
  EXPECT_EQ(p.parameter_count(), lstm0 + 2 * lstm_upper + (7 * g + 7) + (10 * 7 + 10));
}

TEST(InitParameters, InitialStateAndBiasesZeroAndDeterministic) {
  const ModelConfig cfg{7, 2, 5, 9};
  Rng a(3), b(3);
  const auto p = init_parameters<double>(cfg, a);
  EXPECT_EQ(p, init_parameters<double>(cfg, b));
  for (const auto& l : p.layers) {
    for (double v : l.h0) EXPECT_EQ(v, 0.0);
    for (double v : l.c0) EXPECT_EQ(v, 0.0);
    for (const auto& bias : l.bias)
      for (double v : bias) EXPECT_EQ(v, 0.0);
    for (const auto& w : l.peephole)
      for (double v : w) EXPECT_EQ(v, 0.0);
  }
  for (double v : p.hidden_dense.bias) EXPECT_EQ(v, 0.0);
  p.check_shapes(cfg);
}

TEST(InitParameters, RecurrentMatricesOrthogonal) {
  const ModelConfig cfg{7, 1, 6, 9};
  Rng rng(5);
  const auto p = init_parameters<double>(cfg, rng);
  for (const auto& w : p.layers[0].recurrent) {
    Matrix<double> wtw(6, 6);
    gemm_tn(w, w, wtw);
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(wtw(i, j), i == j ? 1.0 : 0.0, 1e-9);
  }
}

TEST(TensorNames, StableOrder) {
  const auto p = Parameters<double>::zeros({3, 1, 2, 2});
  const auto t = p.tensors();
  ASSERT_EQ(t.size(), 4u + 4u + 3u + 4u + 2u + 4u);
  EXPECT_EQ(t.front().name, "lstm0.U_i");
  EXPECT_EQ(t.back().name, "dense2.b");
  std::size_t initial = 0;
  for (const auto& x : t) initial += x.role == TensorRole::kInitialState;
  EXPECT_EQ(initial, 2u);
}

TEST(OneHot, Values) {
  EXPECT_EQ(one_hot<double>(2, 5), (Vector<double>{0, 0, 1, 0, 0}));
  EXPECT_EQ(one_hot<double>(0, 1), (Vector<double>{1}));
  EXPECT_THROW(one_hot<double>(5, 5), std::out_of_range);
}

TEST(LstmStep, ZeroParametersGiveZeroState) {
  const ModelConfig cfg{4, 1, 3, 2};
  const auto p = Parameters<double>::zeros(cfg);
  const auto s = LstmState<double>::zeros(cfg);
  const TokenId tok = 1;
  const auto out = lstm_step(p, 0, std::span<const TokenId>(&tok, 1), s.layers[0]);
  for (double v : out.h.span()) EXPECT_EQ(v, 0.0);
  for (double v : out.c.span()) EXPECT_EQ(v, 0.0);
  for (double v : out.i.span()) EXPECT_EQ(v, 0.5);
}

TEST(LstmStep, ZeroParametersCarryHalfCell) {
  const ModelConfig cfg{4, 1, 3, 2};
  const auto p = Parameters<double>::zeros(cfg);
  auto s = LstmState<double>::zeros(cfg);
  s.layers[0].c.fill(1.0);
  const TokenId tok = 0;
  const auto out = lstm_step(p, 0, std::span<const TokenId>(&tok, 1), s.layers[0]);
  for (double v : out.c.span()) EXPECT_DOUBLE_EQ(v, 0.5);
  for (double v : out.h.span()) EXPECT_NEAR(v, 0.5 * std::tanh(0.5), 1e-15);
  EXPECT_NEAR(out.h(0, 0), 0.23106, 1e-5);
}

TEST(LstmStep, MatchesScalarOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ModelConfig cfg{5, 2, 2, 3};
    const auto p = random_parameters<double>(cfg, seed, 0.8);
    Rng rng(seed + 100);
    ScalarState s{{rng.normal(), rng.normal()}, {rng.normal(), rng.normal()}};
    LayerState<double> ls{Matrix<double>(1, 2), Matrix<double>(1, 2)};
    for (std::size_t k = 0; k < 2; ++k) {
      ls.h(0, k) = s.h[k];
      ls.c(0, k) = s.c[k];
    }
    // Layer 0 via token ids.
    const TokenId tok = 3;
    const auto got0 = lstm_step(p, 0, std::span<const TokenId>(&tok, 1), ls);
    std::vector<double> x(5, 0.0);
    x[3] = 1.0;
    const auto want0 = scalar_lstm(p.layers[0], x, s);
    // Layer 1 via a dense input.
    Matrix<double> dense_x(1, 2);
    dense_x(0, 0) = 0.3;
    dense_x(0, 1) = -1.1;
    const auto got1 = lstm_step(p, 1, dense_x, ls);
    const auto want1 = scalar_lstm(p.layers[1], {0.3, -1.1}, s);
    for (std::size_t k = 0; k < 2; ++k) {
      EXPECT_NEAR(got0.h(0, k), want0.h[k], 1e-12);
      EXPECT_NEAR(got0.c(0, k), want0.c[k], 1e-12);
      EXPECT_NEAR(got1.h(0, k), want1.h[k], 1e-12);
      EXPECT_NEAR(got1.c(0, k), want1.c[k], 1e-12);
    }
  }
}

TEST(LstmStep, RejectsBadShapes) {
  const ModelConfig cfg{4, 2, 3, 2};
  const auto p = Parameters<double>::zeros(cfg);
  const auto s = LstmState<double>::zeros(cfg);
  const TokenId bad = 4;
  EXPECT_THROW(lstm_step(p, 0, std::span<const TokenId>(&bad, 1), s.layers[0]), std::exception);
  EXPECT_THROW(lstm_step(p, 1, Matrix<double>(1, 5), s.layers[1]), std::invalid_argument);
  const TokenId ok = 1;
  EXPECT_THROW(lstm_step(p, 1, std::span<const TokenId>(&ok, 1), s.layers[1]), std::invalid_argument);
}

TEST(ForwardStep, ZeroModelIsUniform) {
  const ModelConfig cfg{6, 1, 4, 5};
  const auto p = Parameters<double>::zeros(cfg);
  const auto out = forward_step(p, cfg, 2, initial_state(p, cfg));
  for (double v : out.y) EXPECT_DOUBLE_EQ(v, 1.0 / 6.0);
}

TEST(ForwardStep, MatchesScalarOracleThroughTwoLayers) {
  const ModelConfig cfg{5, 2, 3, 4};
  const auto p = random_parameters<double>(cfg, 9);
  const auto state = initial_state(p, cfg);
  const auto out = forward_step(p, cfg, 4, state);

  ScalarState s0{{p.layers[0].h0.begin(), p.layers[0].h0.end()}, {p.layers[0].c0.begin(), p.layers[0].c0.end()}};
  ScalarState s1{{p.layers[1].h0.begin(), p.layers[1].h0.end()}, {p.layers[1].c0.begin(), p.layers[1].c0.end()}};
  std::vector<double> x(5, 0.0);
  x[4] = 1.0;
  const auto a = scalar_lstm(p.layers[0], x, s0);
  const auto b = scalar_lstm(p.layers[1], a.h, s1);
  const auto y = scalar_head(p, cfg, b.h);
  double sum = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_NEAR(out.y[k], y[k], 1e-12);
    sum += out.y[k];
  }
  EXPECT_NEAR(sum, 1.0, 1e-9);
  // Stacking: the upper layer sees the lower layer's fresh output.
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(out.state.layers[0].h(0, k), a.h[k], 1e-12);
}

TEST(ForwardSequence, LengthOneEqualsForwardStep) {
  const ModelConfig cfg{5, 1, 4, 6};
  const auto p = random_parameters<double>(cfg, 2);
  const std::vector<TokenId> tokens = {3};
  const auto seq = forward_sequence(p, cfg, tokens, initial_state(p, cfg));
  const auto step = forward_step(p, cfg, 3, initial_state(p, cfg));
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(seq.tape.steps[0].probs(0, k), step.y[k]);
}

TEST(ForwardSequence, SplitAndCarryEqualsOneCall) {
  const ModelConfig cfg{6, 2, 5, 7};
  const auto p = random_parameters<double>(cfg, 4);
  Rng rng(1);
  const auto tokens = testing::random_tokens(10, 6, rng);
  const auto full = forward_sequence(p, cfg, tokens, initial_state(p, cfg));
  const std::span<const TokenId> all(tokens);
  const auto head = forward_sequence(p, cfg, all.first(4), initial_state(p, cfg));
  const auto tail = forward_sequence(p, cfg, all.subspan(4), head.state);
  for (std::size_t t = 0; t < 10; ++t) {
    const auto& got = t < 4 ? head.tape.steps[t].probs : tail.tape.steps[t - 4].probs;
    for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(got(0, k), full.tape.steps[t].probs(0, k), 1e-12);
  }
  for (std::size_t l = 0; l < 2; ++l)
    for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(tail.state.layers[l].c(0, k), full.state.layers[l].c(0, k), 1e-12);
}

TEST(ForwardSequence, TapeRecordsInjectedState) {
  const ModelConfig cfg{4, 1, 3, 3};
  const auto p = random_parameters<double>(cfg, 6);
  auto s = LstmState<double>::zeros(cfg);
  s.layers[0].h(0, 1) = 0.7;
  s.layers[0].c(0, 2) = -0.2;
  const std::vector<TokenId> tokens = {0, 1, 2};
  const auto out = forward_sequence(p, cfg, tokens, s);
  EXPECT_EQ(out.tape.initial.layers[0].h, s.layers[0].h);
  EXPECT_EQ(out.tape.initial.layers[0].c, s.layers[0].c);
  EXPECT_EQ(out.tape.length(), 3u);
  // state_after of the last step is the returned state.
  EXPECT_EQ(out.tape.state_after(2).layers[0].h, out.state.layers[0].h);
}

TEST(ForwardLanes, EachLaneMatchesSingleLane) {
  const ModelConfig cfg{6, 2, 4, 5};
  const auto p = random_parameters<double>(cfg, 8);
  Rng rng(2);
  std::vector<std::vector<TokenId>> inputs;
  for (int j = 0; j < 3; ++j) inputs.push_back(testing::random_tokens(7, 6, rng));
  const auto batched = forward_lanes(p, cfg, inputs, initial_state(p, cfg, 3));
  for (std::size_t j = 0; j < 3; ++j) {
    const auto single = forward_sequence(p, cfg, inputs[j], initial_state(p, cfg));
    for (std::size_t t = 0; t < 7; ++t)
      for (std::size_t k = 0; k < 6; ++k)
        EXPECT_NEAR(batched.tape.steps[t].probs(j, k), single.tape.steps[t].probs(0, k), 1e-12);
  }
}

TEST(ForwardLanes, HeadMaskSkipsOutputs) {
  const ModelConfig cfg{4, 1, 3, 3};
  const auto p = random_parameters<double>(cfg, 1);
  const std::vector<std::vector<TokenId>> inputs = {{0, 1, 2, 3}};
  const auto out = forward_lanes(p, cfg, inputs, initial_state(p, cfg), {false, false, false, true});
  EXPECT_FALSE(out.tape.steps[0].has_output);
  EXPECT_TRUE(out.tape.steps[3].has_output);
  const auto full = forward_lanes(p, cfg, inputs, initial_state(p, cfg));
  EXPECT_EQ(out.tape.steps[3].probs, full.tape.steps[3].probs);
}

TEST(Advance, MatchesForwardSequence) {
  const ModelConfig cfg{5, 2, 4, 6};
  const auto p = random_parameters<double>(cfg, 12);
  const std::vector<TokenId> tokens = {1, 4, 0, 2, 2};
  const auto seq = forward_sequence(p, cfg, tokens, initial_state(p, cfg));
  auto state = initial_state(p, cfg);
  Matrix<double> y;
  for (TokenId t : tokens) y = advance(p, cfg, std::span<const TokenId>(&t, 1), state, true);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(y(0, k), seq.tape.steps.back().probs(0, k));
}

TEST(InitialState, IsACopyOfLearnedValues) {
  const ModelConfig cfg{3, 1, 2, 2};
  auto p = Parameters<double>::zeros(cfg);
  auto fresh = initial_state(p, cfg);
  for (double v : fresh.layers[0].h.span()) EXPECT_EQ(v, 0.0);
  p.layers[0].h0[1] = 0.25;
  p.layers[0].c0[0] = -1.5;
  auto s = initial_state(p, cfg, 3);
  EXPECT_EQ(s.lanes(), 3u);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(s.layers[0].h(j, 1), 0.25);
    EXPECT_EQ(s.layers[0].c(j, 0), -1.5);
  }
  s.layers[0].h(0, 1) = 9.0;
  EXPECT_EQ(p.layers[0].h0[1], 0.25);
}

TEST(LstmState, LaneRoundTrip) {
  const ModelConfig cfg{3, 2, 2, 2};
  auto s = LstmState<double>::zeros(cfg, 4);
  auto one = LstmState<double>::zeros(cfg, 1);
  one.layers[1].c(0, 1) = 3.0;
  s.set_lane(2, one);
  EXPECT_EQ(s.lane(2).layers[1].c(0, 1), 3.0);
  EXPECT_EQ(s.lane(1).layers[1].c(0, 1), 0.0);
}

}  // namespace
}  // namespace charrnn
