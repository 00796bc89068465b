#include "spiralnet/adam.hpp"

#include <cmath>

#include "spiralnet/error.hpp"

namespace spiralnet {

std::size_t count_scalars(const ParamList& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.value->size();
  return n;
}

void zero_grads(const ParamList& params) {
  for (const auto& p : params) p.grad->fill(0.0);
}

void adam_step(const ParamList& params, AdamState& state) {
  for (const auto& p : params) {
    if (!p.grad->same_shape(*p.value)) {
      throw ValidationError("adam: gradient shape of " + p.name + " does not match parameter");
    }
    for (std::size_t i = 0; i < p.grad->size(); ++i) {
      if (!std::isfinite((*p.grad)[i])) {
        throw NumericError("adam: non-finite gradient in " + p.name + " at index " +
                           std::to_string(i) + " (step " + std::to_string(state.step + 1) + ")");
      }
    }
  }
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.value->shape());
      state.v.emplace_back(p.value->shape());
    }
  }
  if (state.m.size() != params.size()) {
    throw ValidationError("adam: state holds " + std::to_string(state.m.size()) +
                          " moments for " + std::to_string(params.size()) + " parameters");
  }

  ++state.step;
  const auto& cfg = state.config;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(cfg.beta1, t);
  const double correct2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& w = *params[k].value;
    const Tensor& g = *params[k].grad;
    Tensor& m = state.m[k];
    Tensor& v = state.v[k];
    if (!m.same_shape(w)) {
      throw ValidationError("adam: moment shape of " + params[k].name + " does not match");
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correct1;
      const double v_hat = v[i] / correct2;
      w[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

}  // namespace spiralnet
