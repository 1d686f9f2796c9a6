// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

#include "charrnn/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "charrnn/errors.hpp"

namespace charrnn {

namespace {

template <typename P, typename G>
void require_congruent(const P& p, const G& g) {
  if (p.size() != g.size()) throw std::invalid_argument("optimizer: parameter/gradient structure mismatch");
  for (std::size_t k = 0; k < p.size(); ++k)
    if (p[k].values.size() != g[k].values.size())
      throw std::invalid_argument("optimizer: shape mismatch in " + p[k].name);
}

}  // namespace

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ConfigError("adam beta1 must be in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("adam beta2 must be in (0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("adam epsilon must be > 0");
}

template <std::floating_point Real>
void sgd_step(Parameters<Real>& params, const Gradients<Real>& grads, double learning_rate) {
  auto p = params.tensors();
  const auto g = grads.tensors();
  require_congruent(p, g);
  const Real lr = static_cast<Real>(learning_rate);
  for (std::size_t k = 0; k < p.size(); ++k)
    for (std::size_t j = 0; j < p[k].values.size(); ++j) p[k].values[j] -= lr * g[k].values[j];
}

template <std::floating_point Real>
AdamState<Real> AdamState<Real>::zeros(const ModelConfig& cfg, const AdamConfig& config) {
  return {config, Parameters<Real>::zeros(cfg), Parameters<Real>::zeros(cfg), 0};
}

template <std::floating_point Real>
void adam_step(Parameters<Real>& params, const Gradients<Real>& grads, AdamState<Real>& state,
               bool update_initial_state) {
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  require_congruent(p, g);
  require_congruent(p, m);
  require_congruent(p, v);

  ++state.step;
  const AdamConfig& c = state.config;
  const double t = static_cast<double>(state.step);
  const Real b1 = static_cast<Real>(c.beta1);
  const Real b2 = static_cast<Real>(c.beta2);
  const Real eps = static_cast<Real>(c.epsilon);
  const Real correction1 = static_cast<Real>(1.0 / (1.0 - std::pow(c.beta1, t)));
  const Real correction2 = static_cast<Real>(1.0 / (1.0 - std::pow(c.beta2, t)));
  const Real lr = static_cast<Real>(c.learning_rate);

  for (std::size_t k = 0; k < p.size(); ++k) {
    if (!update_initial_state && p[k].role == TensorRole::kInitialState) continue;
    Real* w = p[k].values.data();
    const Real* gk = g[k].values.data();
    Real* mk = m[k].values.data();
    Real* vk = v[k].values.data();
    const std::size_t n = p[k].values.size();
    for (std::size_t j = 0; j < n; ++j) {
      mk[j] = b1 * mk[j] + (Real(1) - b1) * gk[j];
      vk[j] = b2 * vk[j] + (Real(1) - b2) * gk[j] * gk[j];
      const Real m_hat = mk[j] * correction1;
      const Real v_hat = vk[j] * correction2;
      w[j] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

#define CHARRNN_INSTANTIATE(Real)                                                              \
  template void sgd_step(Parameters<Real>&, const Gradients<Real>&, double);                   \
  template struct AdamState<Real>;                                                             \
  template void adam_step(Parameters<Real>&, const Gradients<Real>&, AdamState<Real>&, bool);

CHARRNN_INSTANTIATE(float)
CHARRNN_INSTANTIATE(double)

#undef CHARRNN_INSTANTIATE

}  // namespace charrnn
