#include "glsp/nn/optim.hpp"

#include <cmath>

namespace glsp::nn {

AdamState AdamState::for_parameters(std::span<const NamedParameter> params) {
  AdamState s;
  for (const auto& [name, t] : params) {
    s.m.emplace_back(t.size(), 0.0);
    s.v.emplace_back(t.size(), 0.0);
  }
  return s;
}

void adam_step(std::span<const NamedParameter> params, AdamState& state, double lr,
               double weight_decay) {
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw std::invalid_argument("adam_step: optimizer state does not match the parameter list");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor param = params[p].second;
    std::span<double> value = param.mutable_values();
    std::span<const double> grad = param.grad();
    auto& m = state.m[p];
    auto& v = state.v[p];
    if (m.size() != value.size() || v.size() != value.size()) {
      throw std::invalid_argument("adam_step: moment size mismatch for " + params[p].first);
    }
    for (std::size_t k = 0; k < value.size(); ++k) {
      const double g = grad[k] + weight_decay * value[k];
      m[k] = static_cast<float>(state.beta1 * m[k] + (1.0 - state.beta1) * g);
      v[k] = static_cast<float>(state.beta2 * v[k] + (1.0 - state.beta2) * g * g);
      const double update = lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + state.epsilon);
      value[k] = static_cast<float>(value[k] - update);
    }
  }
}

}  // namespace glsp::nn
