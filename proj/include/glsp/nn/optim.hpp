#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "glsp/nn/gaan.hpp"

namespace glsp::nn {

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  /// Zero moments shaped like `params`.
  static AdamState for_parameters(std::span<const NamedParameter> params);
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// Adam with L2-coupled weight decay (grad + wd * param) and bias correction.
/// Parameters and moments are rounded to float32 afterwards, so a model saved
/// in float32 resumes exactly.
void adam_step(std::span<const NamedParameter> params, AdamState& state, double lr,
               double weight_decay);

}  // namespace glsp::nn
