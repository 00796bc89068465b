#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spiralnet/random.hpp"
#include "spiralnet/tensor.hpp"

namespace spiralnet {

/// Gate weights act on the concatenation [x_t, h_{t-1}]:
///   f = sigma([x,h] W_f + b_f)      i = sigma([x,h] W_i + b_i)
///   o = sigma([x,h] W_o + b_o)      g = tanh([x,h] W_c + b_c)
///   c_t = f . c_{t-1} + i . g       h_t = o . tanh(c_t)
/// Each W is (input_dim + hidden_dim) x hidden_dim; rows [0, input_dim)
/// multiply x, the rest multiply h.
struct LstmParams {
  Tensor w_f, w_i, w_o, w_c;
  Tensor b_f, b_i, b_o, b_c;

  static LstmParams zeros(std::size_t input_dim, std::size_t hidden_dim);
  /// Glorot-uniform weights with fan_in = input_dim + hidden_dim and
  /// fan_out = hidden_dim; biases zero except b_f = forget_bias.
  static LstmParams glorot(std::size_t input_dim, std::size_t hidden_dim, Rng& rng,
                           double forget_bias = 0.0);

  std::size_t input_dim() const { return w_f.rows() - hidden_dim(); }
  std::size_t hidden_dim() const { return w_f.cols(); }
  std::size_t parameter_count() const;
};

struct LstmState {
  Tensor c;  // B x H
  Tensor h;  // B x H

  static LstmState zeros(std::size_t batch, std::size_t hidden_dim);
};

/// Intermediate values of one step, kept for the backward pass.
struct LstmStepCache {
  Tensor xh;                  // B x (Din + H)
  Tensor f, i, o, g;          // gate activations, B x H
  Tensor c_prev, tanh_c;      // B x H
  std::vector<std::uint8_t> active;  // per row; inactive rows carry state unchanged
};

/// One step for every row. Rows with active[r] == 0 keep their state.
/// An empty `active` span means all rows are active.
LstmState lstm_step(const Tensor& x, const LstmState& state, const LstmParams& params,
                    LstmStepCache* cache = nullptr, std::span<const std::uint8_t> active = {});

/// Gradients w.r.t. the step inputs given dL/dh_t and dL/dc_t. Accumulates
/// parameter gradients into `grads`.
struct LstmStepGrad {
  Tensor dx;       // B x Din
  Tensor dh_prev;  // B x H
  Tensor dc_prev;  // B x H
};
LstmStepGrad lstm_step_backward(const LstmStepCache& cache, const LstmParams& params,
                                const Tensor& dh, const Tensor& dc, LstmParams& grads);

struct LstmSequenceCache {
  std::size_t batch = 0;
  std::size_t steps = 0;
  std::vector<LstmStepCache> step;
};

/// Runs the cell over xs [B x N x Din] from a zero state. mask [B*N] marks
/// real steps (1) and must be a prefix per row: padded steps never update
/// the state. Returns h at each row's last real step [B x H]. If
/// `hidden_seq` is given it receives h_t at every step [B x N x H], zero at
/// padded steps. Throws ValidationError for rows with no real step.
Tensor lstm_sequence(const Tensor& xs, std::span<const std::uint8_t> mask,
                     const LstmParams& params, Tensor* hidden_seq = nullptr,
                     LstmSequenceCache* cache = nullptr);

/// Backprop through time. d_last is dL/d(returned h) [B x H]; d_seq is
/// dL/d(hidden_seq) [B x N x H] or null. Returns dL/dxs [B x N x Din].
Tensor lstm_sequence_backward(const LstmSequenceCache& cache, const LstmParams& params,
                              const Tensor* d_last, const Tensor* d_seq, LstmParams& grads);

}  // namespace spiralnet
