#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spiralnet/random.hpp"
#include "spiralnet/tensor.hpp"

namespace spiralnet {

// ---------------------------------------------------------------- kernels
// All matrices are rank-2 row-major tensors. Kernels that sum over rows
// (the weight-gradient products) reduce per-thread partials in a fixed
// order; see parallel.hpp.

/// a[B x K] * b[K x N].
Tensor matmul(const Tensor& a, const Tensor& b);
/// out[K x N] += a[B x K]^T * g[B x N].
void matmul_at_b_acc(const Tensor& a, const Tensor& g, Tensor& out);
/// a[B x N] * b[K x N]^T.
Tensor matmul_a_bt(const Tensor& a, const Tensor& b);

// ---------------------------------------------------------------- layers

/// Weights and biases of one fully-connected layer: W is in x out.
struct LinearParams {
  Tensor weight;
  Tensor bias;

  static LinearParams zeros(std::size_t in, std::size_t out);
  std::size_t input_dim() const { return weight.rows(); }
  std::size_t output_dim() const { return weight.cols(); }
  std::size_t parameter_count() const { return weight.size() + bias.size(); }
};

/// xW + b. Throws ValidationError on shape mismatch.
Tensor fc_forward(const Tensor& x, const Tensor& weight, const Tensor& bias);
inline Tensor fc_forward(const Tensor& x, const LinearParams& p) {
  return fc_forward(x, p.weight, p.bias);
}

/// Accumulates dW, db into grads and returns dL/dx.
Tensor fc_backward(const Tensor& x, const LinearParams& p, const Tensor& dy, LinearParams& grads);

/// Uniform Glorot init: weights in +-sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Tensor& weight, std::size_t fan_in, std::size_t fan_out, Rng& rng);

Tensor relu(const Tensor& x);
/// dy masked by (y > 0), where y is the relu output.
Tensor relu_backward(const Tensor& y, const Tensor& dy);

/// Row-wise softmax with max subtraction.
Tensor softmax(const Tensor& logits);

/// Floor applied to probabilities before taking the log.
inline constexpr double kLogFloor = 1e-12;

/// Mean over rows of -log(max(p[row, label], kLogFloor)).
double cross_entropy(const Tensor& probs, std::span<const std::int32_t> labels);

/// Gradient of mean cross_entropy(softmax(logits)) w.r.t. the logits,
/// computed from the softmax output: (p - onehot) / B.
Tensor softmax_cross_entropy_backward(const Tensor& probs, std::span<const std::int32_t> labels);

enum class Mode { train, eval };

/// Inverted dropout. In train mode each unit is zeroed with probability p
/// and survivors are scaled by 1/(1-p); `scale` receives the per-unit
/// multiplier for the backward pass. Eval mode is the identity.
Tensor dropout(const Tensor& x, double p, Mode mode, Rng& rng, Tensor* scale = nullptr);
Tensor dropout_backward(const Tensor& dy, const Tensor& scale);

/// Argmax per row.
std::vector<std::int32_t> argmax_rows(const Tensor& x);

}  // namespace spiralnet
