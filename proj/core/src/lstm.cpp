#include "spiralnet/lstm.hpp"

#include <cmath>

#include "spiralnet/error.hpp"
#include "spiralnet/nn.hpp"

namespace spiralnet {

namespace {

double sigmoid(double x) {
  // Split by sign so exp never overflows.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor gate(const Tensor& xh, const Tensor& w, const Tensor& b, bool use_tanh) {
  Tensor z = fc_forward(xh, w, b);
  for (auto& v : z.values()) v = use_tanh ? std::tanh(v) : sigmoid(v);
  return z;
}

bool row_active(std::span<const std::uint8_t> active, std::size_t r) {
  return active.empty() || active[r] != 0;
}

void add_row_sums(const Tensor& d, Tensor& bias) {
  const std::size_t n = d.cols();
  for (std::size_t r = 0; r < d.rows(); ++r) {
    for (std::size_t j = 0; j < n; ++j) bias[j] += d(r, j);
  }
}

Tensor concat_columns(const Tensor& x, const Tensor& h) {
  Tensor xh({x.rows(), x.cols() + h.cols()});
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto dst = xh.row(r);
    const auto xr = x.row(r);
    const auto hr = h.row(r);
    std::copy(xr.begin(), xr.end(), dst.begin());
    std::copy(hr.begin(), hr.end(), dst.begin() + static_cast<std::ptrdiff_t>(x.cols()));
  }
  return xh;
}

}  // namespace

LstmParams LstmParams::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  const Shape w{input_dim + hidden_dim, hidden_dim};
  const Shape b{hidden_dim};
  return {Tensor(w), Tensor(w), Tensor(w), Tensor(w), Tensor(b), Tensor(b), Tensor(b), Tensor(b)};
}

LstmParams LstmParams::glorot(std::size_t input_dim, std::size_t hidden_dim, Rng& rng,
                              double forget_bias) {
  LstmParams p = zeros(input_dim, hidden_dim);
  for (Tensor* w : {&p.w_f, &p.w_i, &p.w_o, &p.w_c}) {
    glorot_uniform(*w, input_dim + hidden_dim, hidden_dim, rng);
  }
  p.b_f.fill(forget_bias);
  return p;
}

std::size_t LstmParams::parameter_count() const {
  return w_f.size() + w_i.size() + w_o.size() + w_c.size() + b_f.size() + b_i.size() +
         b_o.size() + b_c.size();
}

LstmState LstmState::zeros(std::size_t batch, std::size_t hidden_dim) {
  return {Tensor({batch, hidden_dim}), Tensor({batch, hidden_dim})};
}

LstmState lstm_step(const Tensor& x, const LstmState& state, const LstmParams& params,
                    LstmStepCache* cache, std::span<const std::uint8_t> active) {
  const std::size_t hdim = params.hidden_dim();
  if (x.rank() != 2 || x.cols() != params.input_dim() || state.h.rank() != 2 ||
      state.h.rows() != x.rows() || state.h.cols() != hdim || !state.c.same_shape(state.h)) {
    throw ValidationError("lstm_step: shape mismatch x" + shape_string(x.shape()) + " h" +
                          shape_string(state.h.shape()) + " for input_dim " +
                          std::to_string(params.input_dim()) + ", hidden_dim " +
                          std::to_string(hdim));
  }
  if (!active.empty() && active.size() != x.rows()) {
    throw ValidationError("lstm_step: active mask length does not match batch");
  }
  Tensor xh = concat_columns(x, state.h);
  Tensor f = gate(xh, params.w_f, params.b_f, false);
  Tensor i = gate(xh, params.w_i, params.b_i, false);
  Tensor o = gate(xh, params.w_o, params.b_o, false);
  Tensor g = gate(xh, params.w_c, params.b_c, true);

  LstmState next{state.c, state.h};
  Tensor tanh_c({x.rows(), hdim});
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (!row_active(active, r)) continue;
    for (std::size_t j = 0; j < hdim; ++j) {
      const double c = f(r, j) * state.c(r, j) + i(r, j) * g(r, j);
      const double tc = std::tanh(c);
      next.c(r, j) = c;
      next.h(r, j) = o(r, j) * tc;
      tanh_c(r, j) = tc;
    }
  }
  if (cache) {
    cache->xh = std::move(xh);
    cache->f = std::move(f);
    cache->i = std::move(i);
    cache->o = std::move(o);
    cache->g = std::move(g);
    cache->c_prev = state.c;
    cache->tanh_c = std::move(tanh_c);
    cache->active.assign(active.begin(), active.end());
  }
  return next;
}

LstmStepGrad lstm_step_backward(const LstmStepCache& cache, const LstmParams& params,
                                const Tensor& dh, const Tensor& dc, LstmParams& grads) {
  const std::size_t batch = cache.f.rows();
  const std::size_t hdim = params.hidden_dim();
  const std::size_t din = params.input_dim();
  Tensor da_f({batch, hdim}), da_i({batch, hdim}), da_o({batch, hdim}), da_g({batch, hdim});
  LstmStepGrad out{Tensor({batch, din}), dh, dc};

  for (std::size_t r = 0; r < batch; ++r) {
    if (!row_active(cache.active, r)) continue;  // state passes through unchanged
    for (std::size_t j = 0; j < hdim; ++j) {
      const double f = cache.f(r, j), i = cache.i(r, j), o = cache.o(r, j), g = cache.g(r, j);
      const double tc = cache.tanh_c(r, j);
      const double dhj = dh(r, j);
      const double dct = dc(r, j) + dhj * o * (1.0 - tc * tc);
      da_o(r, j) = dhj * tc * o * (1.0 - o);
      da_f(r, j) = dct * cache.c_prev(r, j) * f * (1.0 - f);
      da_i(r, j) = dct * g * i * (1.0 - i);
      da_g(r, j) = dct * i * (1.0 - g * g);
      out.dc_prev(r, j) = dct * f;
    }
  }

  matmul_at_b_acc(cache.xh, da_f, grads.w_f);
  matmul_at_b_acc(cache.xh, da_i, grads.w_i);
  matmul_at_b_acc(cache.xh, da_o, grads.w_o);
  matmul_at_b_acc(cache.xh, da_g, grads.w_c);
  add_row_sums(da_f, grads.b_f);
  add_row_sums(da_i, grads.b_i);
  add_row_sums(da_o, grads.b_o);
  add_row_sums(da_g, grads.b_c);

  Tensor dxh = matmul_a_bt(da_f, params.w_f);
  const Tensor parts[3] = {matmul_a_bt(da_i, params.w_i), matmul_a_bt(da_o, params.w_o),
                           matmul_a_bt(da_g, params.w_c)};
  for (const auto& p : parts) {
    for (std::size_t k = 0; k < dxh.size(); ++k) dxh[k] += p[k];
  }
  for (std::size_t r = 0; r < batch; ++r) {
    if (!row_active(cache.active, r)) continue;
    for (std::size_t k = 0; k < din; ++k) out.dx(r, k) = dxh(r, k);
    for (std::size_t j = 0; j < hdim; ++j) out.dh_prev(r, j) = dxh(r, din + j);
  }
  return out;
}

Tensor lstm_sequence(const Tensor& xs, std::span<const std::uint8_t> mask,
                     const LstmParams& params, Tensor* hidden_seq, LstmSequenceCache* cache) {
  if (xs.rank() != 3 || xs.dim(2) != params.input_dim()) {
    throw ValidationError("lstm_sequence: expected [B x N x " + std::to_string(params.input_dim()) +
                          "] input, got " + shape_string(xs.shape()));
  }
  const std::size_t batch = xs.dim(0), steps = xs.dim(1), din = xs.dim(2);
  const std::size_t hdim = params.hidden_dim();
  if (mask.size() != batch * steps) {
    throw ValidationError("lstm_sequence: mask length does not match input");
  }
  for (std::size_t b = 0; b < batch; ++b) {
    if (steps == 0 || !mask[b * steps]) {
      throw ValidationError("lstm_sequence: row " + std::to_string(b) + " has no real step");
    }
    for (std::size_t t = 1; t < steps; ++t) {
      if (mask[b * steps + t] && !mask[b * steps + t - 1]) {
        throw ValidationError("lstm_sequence: row " + std::to_string(b) +
                              " mask is not a contiguous prefix");
      }
    }
  }

  if (hidden_seq) *hidden_seq = Tensor({batch, steps, hdim});
  if (cache) {
    cache->batch = batch;
    cache->steps = steps;
    cache->step.assign(steps, {});
  }
  LstmState state = LstmState::zeros(batch, hdim);
  Tensor x({batch, din});
  std::vector<std::uint8_t> active(batch);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t b = 0; b < batch; ++b) {
      const double* src = xs.data() + (b * steps + t) * din;
      std::copy(src, src + din, x.data() + b * din);
      active[b] = mask[b * steps + t];
    }
    state = lstm_step(x, state, params, cache ? &cache->step[t] : nullptr, active);
    if (hidden_seq) {
      for (std::size_t b = 0; b < batch; ++b) {
        if (!active[b]) continue;
        std::copy(state.h.data() + b * hdim, state.h.data() + (b + 1) * hdim,
                  hidden_seq->data() + (b * steps + t) * hdim);
      }
    }
  }
  return state.h;
}

Tensor lstm_sequence_backward(const LstmSequenceCache& cache, const LstmParams& params,
                              const Tensor* d_last, const Tensor* d_seq, LstmParams& grads) {
  const std::size_t batch = cache.batch, steps = cache.steps;
  const std::size_t hdim = params.hidden_dim(), din = params.input_dim();
  Tensor dh = d_last ? *d_last : Tensor({batch, hdim});
  Tensor dc({batch, hdim});
  Tensor dxs({batch, steps, din});
  for (std::size_t t = steps; t-- > 0;) {
    const auto& sc = cache.step[t];
    if (d_seq) {
      for (std::size_t b = 0; b < batch; ++b) {
        if (!row_active(sc.active, b)) continue;
        const double* src = d_seq->data() + (b * steps + t) * hdim;
        for (std::size_t j = 0; j < hdim; ++j) dh(b, j) += src[j];
      }
    }
    LstmStepGrad g = lstm_step_backward(sc, params, dh, dc, grads);
    for (std::size_t b = 0; b < batch; ++b) {
      std::copy(g.dx.data() + b * din, g.dx.data() + (b + 1) * din,
                dxs.data() + (b * steps + t) * din);
    }
    dh = std::move(g.dh_prev);
    dc = std::move(g.dc_prev);
  }
  return dxs;
}

}  // namespace spiralnet
