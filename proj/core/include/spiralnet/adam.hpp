#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spiralnet/tensor.hpp"

namespace spiralnet {

/// Named view of one trainable tensor and its gradient buffer.
struct ParamRef {
  std::string name;
  Tensor* value = nullptr;
  Tensor* grad = nullptr;
};
using ParamList = std::vector<ParamRef>;

std::size_t count_scalars(const ParamList& params);
void zero_grads(const ParamList& params);

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment estimates, one tensor per parameter in ParamList order.
struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

/// Bias-corrected Adam:
///   m = b1 m + (1-b1) g,  v = b2 v + (1-b2) g^2,
///   w -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
/// Moments are created on the first call. Throws NumericError, leaving all
/// parameters untouched, if any gradient is NaN/Inf.
void adam_step(const ParamList& params, AdamState& state);

}  // namespace spiralnet
