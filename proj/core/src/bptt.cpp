// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

#include "charrnn/bptt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace charrnn {

template <std::floating_point Real>
double cross_entropy(std::span<const Real> y, TokenId target) {
  if (target >= y.size())
    throw std::out_of_range("cross_entropy: target " + std::to_string(target) +
                            " out of range for " + std::to_string(y.size()) + " classes");
  return -std::log(static_cast<double>(y[target]));
}

std::vector<double> loss_weights(std::size_t seq_len, const LossSpec& spec) {
  if (seq_len == 0) throw std::invalid_argument("loss_weights: empty sequence");
  if (spec.window == 0 || spec.window > seq_len)
    throw std::invalid_argument("loss_weights: loss window " + std::to_string(spec.window) +
                                " outside [1, " + std::to_string(seq_len) + "]");
  const std::size_t window = spec.window;
  const std::size_t first = seq_len - window;
  std::vector<double> w(seq_len, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < window; ++i) {
    double gamma = 1.0;
    switch (spec.decay) {
      case LossDecay::kNone:
        break;
      case LossDecay::kLinear:
        gamma = window == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(window - 1);
        break;
      case LossDecay::kExponential:
        gamma = std::exp(static_cast<double>(i) - static_cast<double>(window) + 1.0);
        break;
    }
    w[first + i] = gamma;
    total += gamma;
  }
  for (double& x : w) x /= total;
  return w;
}

namespace {

template <std::floating_point Real>
void validate_targets(const ForwardTape<Real>& tape, const std::vector<std::vector<TokenId>>& targets,
                      std::span<const double> weights, const BackwardOptions& options) {
  if (tape.length() == 0) throw std::invalid_argument("backward: empty tape");
  if (targets.size() != tape.lanes())
    throw std::invalid_argument("backward: " + std::to_string(targets.size()) +
                                " target lanes for a tape with " + std::to_string(tape.lanes()));
  for (const auto& lane : targets)
    if (lane.size() != tape.length())
      throw std::invalid_argument("backward: target length " + std::to_string(lane.size()) +
                                  " != tape length " + std::to_string(tape.length()));
  if (weights.size() != tape.length())
    throw std::invalid_argument("backward: weight length " + std::to_string(weights.size()) +
                                " != tape length " + std::to_string(tape.length()));
  if (options.horizon && tape.length() > *options.horizon)
    throw std::invalid_argument("backward: tape of length " + std::to_string(tape.length()) +
                                " exceeds the truncation horizon " + std::to_string(*options.horizon));
}

template <std::floating_point Real>
void clamp_all(Matrix<Real>& m, Real limit) {
  for (Real& v : m.span()) v = std::clamp(v, -limit, limit);
}

}  // namespace

template <std::floating_point Real>
BackwardResult<Real> backward(const Parameters<Real>& params, const ModelConfig& cfg,
                              const ForwardTape<Real>& tape,
                              const std::vector<std::vector<TokenId>>& targets,
                              std::span<const double> weights, const BackwardOptions& options) {
  validate_targets(tape, targets, weights, options);
  const std::size_t lanes = tape.lanes();
  const std::size_t hidden = cfg.hidden_size;
  const std::size_t layers = cfg.num_layers;
  const Real leak = static_cast<Real>(cfg.leakiness);
  const Real inv_lanes = Real(1) / static_cast<Real>(lanes);

  BackwardResult<Real> result;
  Gradients<Real>& grads = result.grads;
  grads = Gradients<Real>::zeros(cfg);

  std::vector<Matrix<Real>> dh_next(layers, Matrix<Real>(lanes, hidden));
  std::vector<Matrix<Real>> dc_next(layers, Matrix<Real>(lanes, hidden));
  std::vector<Matrix<Real>> dh_cur(layers);
  double loss = 0.0;

  for (std::size_t t = tape.length(); t-- > 0;) {
    const StepCache<Real>& step = tape.steps[t];
    for (std::size_t l = 0; l < layers; ++l) dh_cur[l] = dh_next[l];

    const double w = weights[t];
    if (w != 0.0) {
      if (!step.has_output)
        throw std::invalid_argument("backward: weighted position " + std::to_string(t) +
                                    " has no recorded output");
      const Real scale = static_cast<Real>(w) * inv_lanes;
      Matrix<Real> dlogits = step.probs;
      for (std::size_t b = 0; b < lanes; ++b) {
        const TokenId target = targets[b][t];
        loss += w * cross_entropy<Real>(step.probs.row(b), target) / static_cast<double>(lanes);
        dlogits(b, target) -= Real(1);
      }
      for (Real& v : dlogits.span()) v *= scale;

      gemm_tn(dlogits, step.dense_out, grads.output_dense.weight);
      accumulate_column_sums(dlogits, grads.output_dense.bias);

      Matrix<Real> ddense(lanes, cfg.dense_size);
      gemm_nn(dlogits, params.output_dense.weight, ddense);
      for (std::size_t k = 0; k < ddense.size(); ++k)
        if (step.dense_pre.data()[k] < Real(0)) ddense.data()[k] *= leak;

      const Matrix<Real>& top_h = step.layers.back().h;
      gemm_tn(ddense, top_h, grads.hidden_dense.weight);
      accumulate_column_sums(ddense, grads.hidden_dense.bias);
      gemm_nn(ddense, params.hidden_dense.weight, dh_cur[layers - 1]);
    }

    for (std::size_t l = layers; l-- > 0;) {
      const LayerCache<Real>& cache = step.layers[l];
      const LstmLayerParams<Real>& p = params.layers[l];
      LstmLayerParams<Real>& gp = grads.layers[l];
      const Matrix<Real>& h_prev = t == 0 ? tape.initial.layers[l].h : tape.steps[t - 1].layers[l].h;
      const Matrix<Real>& c_prev = t == 0 ? tape.initial.layers[l].c : tape.steps[t - 1].layers[l].c;

      std::array<Matrix<Real>, kNumGates> da;
      for (auto& m : da) m = Matrix<Real>(lanes, hidden);
      Matrix<Real> dc_prev(lanes, hidden);
      const Matrix<Real>& dh = dh_cur[l];
      const Matrix<Real>& dc_in = dc_next[l];
      const Real* wi = p.peephole[0].data();
      const Real* wf = p.peephole[1].data();
      const Real* wo = p.peephole[2].data();
      for (std::size_t b = 0; b < lanes; ++b) {
        for (std::size_t r = 0; r < hidden; ++r) {
          const std::size_t k = b * hidden + r;
          const Real i = cache.i.data()[k];
          const Real f = cache.f.data()[k];
          const Real g = cache.g.data()[k];
          const Real o = cache.o.data()[k];
          const Real tc = cache.tanh_c.data()[k];
          const Real dhk = dh.data()[k];
          const Real dc = dhk * o * (Real(1) - tc * tc) + dc_in.data()[k];
          da[kOutputGate].data()[k] = dhk * tc * o * (Real(1) - o);
          da[kInputGate].data()[k] = dc * g * i * (Real(1) - i);
          da[kCellGate].data()[k] = dc * i * (Real(1) - g * g);
          da[kForgetGate].data()[k] = dc * c_prev.data()[k] * f * (Real(1) - f);
          dc_prev.data()[k] = dc * f;
        }
      }
      if (options.clip_cell_gradients)
        for (auto& m : da) clamp_all(m, static_cast<Real>(options.cell_clip));
      for (std::size_t b = 0; b < lanes; ++b) {
        for (std::size_t r = 0; r < hidden; ++r) {
          const std::size_t k = b * hidden + r;
          dc_prev.data()[k] += wi[r] * da[kInputGate].data()[k] + wf[r] * da[kForgetGate].data()[k] +
                               wo[r] * da[kOutputGate].data()[k];
        }
      }

      for (std::size_t s = 0; s < kPeepholeGates.size(); ++s) {
        const Matrix<Real>& d = da[kPeepholeGates[s]];
        Real* gw = gp.peephole[s].data();
        for (std::size_t b = 0; b < lanes; ++b)
          for (std::size_t r = 0; r < hidden; ++r)
            gw[r] += d.data()[b * hidden + r] * c_prev.data()[b * hidden + r];
      }

      Matrix<Real> dh_prev(lanes, hidden);
      for (std::size_t g = 0; g < kNumGates; ++g) {
        accumulate_column_sums(da[g], gp.bias[g]);
        gemm_tn(da[g], h_prev, gp.recurrent[g]);
        gemm_nn(da[g], p.recurrent[g], dh_prev);
        if (l == 0) {
          Matrix<Real>& gu = gp.input[g];
          const std::size_t vocab = gu.cols();
          for (std::size_t b = 0; b < lanes; ++b) {
            const TokenId tok = step.tokens[b];
            for (std::size_t r = 0; r < hidden; ++r) gu.data()[r * vocab + tok] += da[g](b, r);
          }
        } else {
          gemm_tn(da[g], step.layers[l - 1].h, gp.input[g]);
          gemm_nn(da[g], p.input[g], dh_cur[l - 1]);
        }
      }
      dh_next[l] = std::move(dh_prev);
      dc_next[l] = std::move(dc_prev);
    }
  }

  result.loss = loss;
  result.initial_state_grad.layers.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    accumulate_column_sums(dh_next[l], grads.layers[l].h0);
    accumulate_column_sums(dc_next[l], grads.layers[l].c0);
    result.initial_state_grad.layers[l] = {std::move(dh_next[l]), std::move(dc_next[l])};
  }
  return result;
}

template <std::floating_point Real>
BackwardResult<Real> backward(const Parameters<Real>& params, const ModelConfig& cfg,
                              const ForwardTape<Real>& tape, std::span<const TokenId> targets,
                              std::span<const double> weights, const BackwardOptions& options) {
  std::vector<std::vector<TokenId>> lanes{std::vector<TokenId>(targets.begin(), targets.end())};
  return backward(params, cfg, tape, lanes, weights, options);
}

template <std::floating_point Real>
double sequence_loss(const Parameters<Real>& params, const ModelConfig& cfg,
                     const std::vector<std::vector<TokenId>>& inputs,
                     const std::vector<std::vector<TokenId>>& targets,
                     std::span<const double> weights, const LstmState<Real>& state_in) {
  if (inputs.empty() || targets.size() != inputs.size())
    throw std::invalid_argument("sequence_loss: lane count mismatch");
  const std::size_t length = inputs.front().size();
  if (weights.size() != length) throw std::invalid_argument("sequence_loss: weight length mismatch");
  std::vector<bool> mask(length);
  for (std::size_t t = 0; t < length; ++t) mask[t] = weights[t] != 0.0;
  const auto out = forward_lanes(params, cfg, inputs, state_in, mask);
  double loss = 0.0;
  for (std::size_t t = 0; t < length; ++t) {
    if (!mask[t]) continue;
    for (std::size_t b = 0; b < inputs.size(); ++b)
      loss += weights[t] * cross_entropy<Real>(out.tape.steps[t].probs.row(b), targets[b].at(t)) /
              static_cast<double>(inputs.size());
  }
  return loss;
}

template <std::floating_point Real>
void clip_elementwise(Gradients<Real>& grads, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("clip_elementwise: threshold must be > 0");
  const Real limit = static_cast<Real>(threshold);
  for (auto& t : grads.tensors())
    for (Real& v : t.values) v = std::clamp(v, -limit, limit);
}

namespace {

// Same weighted loss as sequence_loss, accumulated in Real instead of double.
template <std::floating_point Real>
Real weighted_loss(const Parameters<Real>& params, const ModelConfig& cfg,
                   const std::vector<std::vector<TokenId>>& inputs,
                   const std::vector<std::vector<TokenId>>& targets, std::span<const double> weights) {
  const std::size_t lanes = inputs.size();
  std::vector<bool> mask(weights.size());
  for (std::size_t t = 0; t < weights.size(); ++t) mask[t] = weights[t] != 0.0;
  const auto out = forward_lanes(params, cfg, inputs, initial_state(params, cfg, lanes), mask);
  Real loss = 0;
  for (std::size_t t = 0; t < weights.size(); ++t) {
    if (!mask[t]) continue;
    for (std::size_t b = 0; b < lanes; ++b)
      loss -= static_cast<Real>(weights[t]) * std::log(out.tape.steps[t].probs(b, targets[b].at(t)));
  }
  return loss / static_cast<Real>(lanes);
}

template <std::floating_point Real>
Gradients<double> central_differences(const Parameters<double>& params, const ModelConfig& cfg,
                                      const std::vector<std::vector<TokenId>>& inputs,
                                      const std::vector<std::vector<TokenId>>& targets,
                                      std::span<const double> weights, double epsilon) {
  Parameters<Real> probe = Parameters<Real>::zeros(cfg);
  auto probe_tensors = probe.tensors();
  const auto source = params.tensors();
  for (std::size_t k = 0; k < source.size(); ++k)
    std::copy(source[k].values.begin(), source[k].values.end(), probe_tensors[k].values.begin());
  Gradients<double> grads = Gradients<double>::zeros(cfg);
  auto grad_tensors = grads.tensors();
  const Real eps = static_cast<Real>(epsilon);
  for (std::size_t k = 0; k < probe_tensors.size(); ++k) {
    auto values = probe_tensors[k].values;
    for (std::size_t j = 0; j < values.size(); ++j) {
      const Real saved = values[j];
      values[j] = saved + eps;
      const Real plus = weighted_loss(probe, cfg, inputs, targets, weights);
      values[j] = saved - eps;
      const Real minus = weighted_loss(probe, cfg, inputs, targets, weights);
      values[j] = saved;
      grad_tensors[k].values[j] = static_cast<double>((plus - minus) / (2 * eps));
    }
  }
  return grads;
}

}  // namespace

Gradients<double> finite_diff_gradient(const Parameters<double>& params, const ModelConfig& cfg,
                                       const std::vector<std::vector<TokenId>>& inputs,
                                       const std::vector<std::vector<TokenId>>& targets,
                                       std::span<const double> weights, double epsilon,
                                       FiniteDiffPrecision precision) {
  if (precision == FiniteDiffPrecision::kDouble)
    return central_differences<double>(params, cfg, inputs, targets, weights, epsilon);
  return central_differences<long double>(params, cfg, inputs, targets, weights, epsilon);
}

GradientComparison compare_gradients(const Gradients<double>& analytic,
                                     const Gradients<double>& numeric, double floor) {
  const auto a = analytic.tensors();
  const auto n = numeric.tensors();
  if (a.size() != n.size()) throw std::invalid_argument("compare_gradients: structure mismatch");
  GradientComparison out;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].values.size() != n[k].values.size())
      throw std::invalid_argument("compare_gradients: size mismatch in " + a[k].name);
    for (std::size_t j = 0; j < a[k].values.size(); ++j) {
      const double x = a[k].values[j];
      const double y = n[k].values[j];
      const double scale = std::max(std::abs(x), std::abs(y));
      if (scale < floor) {
        ++out.skipped;
        continue;
      }
      ++out.compared;
      out.max_relative_error = std::max(out.max_relative_error, std::abs(x - y) / scale);
    }
  }
  return out;
}

#define CHARRNN_INSTANTIATE(Real)                                                              \
  template double cross_entropy<Real>(std::span<const Real>, TokenId);                         \
  template BackwardResult<Real> backward(const Parameters<Real>&, const ModelConfig&,          \
                                         const ForwardTape<Real>&,                             \
                                         const std::vector<std::vector<TokenId>>&,             \
                                         std::span<const double>, const BackwardOptions&);     \
  template BackwardResult<Real> backward(const Parameters<Real>&, const ModelConfig&,          \
                                         const ForwardTape<Real>&, std::span<const TokenId>,   \
                                         std::span<const double>, const BackwardOptions&);     \
  template double sequence_loss(const Parameters<Real>&, const ModelConfig&,                   \
                                const std::vector<std::vector<TokenId>>&,                      \
                                const std::vector<std::vector<TokenId>>&,                      \
                                std::span<const double>, const LstmState<Real>&);              \
  template void clip_elementwise(Gradients<Real>&, double);

CHARRNN_INSTANTIATE(float)
CHARRNN_INSTANTIATE(double)

#undef CHARRNN_INSTANTIATE

}  // namespace charrnn
