#include "spiralnet/nn.hpp"

#include <algorithm>
#include <cmath>

#include "spiralnet/error.hpp"
#include "spiralnet/parallel.hpp"

namespace spiralnet {

namespace {

void require_matrix(const Tensor& t, const char* what) {
  if (t.rank() != 2) {
    throw ValidationError(std::string(what) + ": expected a matrix, got shape " +
                          shape_string(t.shape()));
  }
}

void require_labels(const Tensor& probs, std::span<const std::int32_t> labels) {
  require_matrix(probs, "cross_entropy");
  if (labels.size() != probs.rows()) {
    throw ValidationError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(probs.rows()) + " rows");
  }
  for (auto label : labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= probs.cols()) {
      throw ValidationError("cross_entropy: label " + std::to_string(label) +
                            " out of range for " + std::to_string(probs.cols()) + " classes");
    }
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  if (a.cols() != b.rows()) {
    throw ValidationError("matmul: shape mismatch " + shape_string(a.shape()) + " * " +
                          shape_string(b.shape()));
  }
  const std::size_t k = a.cols(), n = b.cols();
  Tensor out({a.rows(), n});
  parallel_for(a.rows(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double* o = out.data() + i * n;
      const double* ai = a.data() + i * k;
      for (std::size_t p = 0; p < k; ++p) {
        const double s = ai[p];
        if (s == 0.0) continue;
        const double* bp = b.data() + p * n;
        for (std::size_t j = 0; j < n; ++j) o[j] += s * bp[j];
      }
    }
  });
  return out;
}

void matmul_at_b_acc(const Tensor& a, const Tensor& g, Tensor& out) {
  require_matrix(a, "matmul_at_b");
  require_matrix(g, "matmul_at_b");
  if (a.rows() != g.rows() || out.rank() != 2 || out.rows() != a.cols() || out.cols() != g.cols()) {
    throw ValidationError("matmul_at_b: shape mismatch " + shape_string(a.shape()) + "^T * " +
                          shape_string(g.shape()) + " into " + shape_string(out.shape()));
  }
  const std::size_t k = a.cols(), n = g.cols();
  const std::size_t chunks = std::max<std::size_t>(1, std::min(thread_count(), a.rows()));
  std::vector<Tensor> partial(chunks, Tensor({k, n}));
  parallel_chunks(a.rows(), chunks, [&](std::size_t begin, std::size_t end, std::size_t c) {
    double* acc = partial[c].data();
    for (std::size_t r = begin; r < end; ++r) {
      const double* ar = a.data() + r * k;
      const double* gr = g.data() + r * n;
      for (std::size_t p = 0; p < k; ++p) {
        const double s = ar[p];
        if (s == 0.0) continue;
        double* row = acc + p * n;
        for (std::size_t j = 0; j < n; ++j) row[j] += s * gr[j];
      }
    }
  });
  for (const auto& p : partial) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += p[i];
  }
}

Tensor matmul_a_bt(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_a_bt");
  require_matrix(b, "matmul_a_bt");
  if (a.cols() != b.cols()) {
    throw ValidationError("matmul_a_bt: shape mismatch " + shape_string(a.shape()) + " * " +
                          shape_string(b.shape()) + "^T");
  }
  const std::size_t n = a.cols(), k = b.rows();
  Tensor out({a.rows(), k});
  parallel_for(a.rows(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double* ai = a.data() + i * n;
      for (std::size_t j = 0; j < k; ++j) {
        const double* bj = b.data() + j * n;
        double s = 0.0;
        for (std::size_t p = 0; p < n; ++p) s += ai[p] * bj[p];
        out(i, j) = s;
      }
    }
  });
  return out;
}

LinearParams LinearParams::zeros(std::size_t in, std::size_t out) {
  return {Tensor({in, out}), Tensor({out})};
}

Tensor fc_forward(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_matrix(x, "fc_forward");
  require_matrix(weight, "fc_forward");
  if (x.cols() != weight.rows() || bias.rank() != 1 || bias.size() != weight.cols()) {
    throw ValidationError("fc_forward: shape mismatch x" + shape_string(x.shape()) + " W" +
                          shape_string(weight.shape()) + " b" + shape_string(bias.shape()));
  }
  Tensor out = matmul(x, weight);
  const std::size_t n = out.cols();
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double* o = out.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) o[j] += bias[j];
  }
  return out;
}

Tensor fc_backward(const Tensor& x, const LinearParams& p, const Tensor& dy, LinearParams& grads) {
  matmul_at_b_acc(x, dy, grads.weight);
  const std::size_t n = dy.cols();
  for (std::size_t i = 0; i < dy.rows(); ++i) {
    const double* d = dy.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) grads.bias[j] += d[j];
  }
  return matmul_a_bt(dy, p.weight);
}

void glorot_uniform(Tensor& weight, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& w : weight.values()) w = rng.uniform(-limit, limit);
}

Tensor relu(const Tensor& x) {
  Tensor out = x;
  for (auto& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

Tensor relu_backward(const Tensor& y, const Tensor& dy) {
  Tensor out = dy;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(y[i] > 0.0)) out[i] = 0.0;
  }
  return out;
}

Tensor softmax(const Tensor& logits) {
  require_matrix(logits, "softmax");
  Tensor out = logits;
  const std::size_t n = out.cols();
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double* r = out.data() + i * n;
    const double m = *std::max_element(r, r + n);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      r[j] = std::exp(r[j] - m);
      sum += r[j];
    }
    for (std::size_t j = 0; j < n; ++j) r[j] /= sum;
  }
  return out;
}

double cross_entropy(const Tensor& probs, std::span<const std::int32_t> labels) {
  require_labels(probs, labels);
  if (labels.empty()) throw ValidationError("cross_entropy: empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    total -= std::log(std::max(probs(i, static_cast<std::size_t>(labels[i])), kLogFloor));
  }
  return total / static_cast<double>(labels.size());
}

Tensor softmax_cross_entropy_backward(const Tensor& probs, std::span<const std::int32_t> labels) {
  require_labels(probs, labels);
  Tensor grad = probs;
  const double inv = 1.0 / static_cast<double>(labels.size());
  for (auto& g : grad.values()) g *= inv;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    grad(i, static_cast<std::size_t>(labels[i])) -= inv;
  }
  return grad;
}

Tensor dropout(const Tensor& x, double p, Mode mode, Rng& rng, Tensor* scale) {
  if (p < 0.0 || p >= 1.0) throw ValidationError("dropout: p must be in [0, 1)");
  if (mode == Mode::eval || p == 0.0) {
    if (scale) *scale = Tensor(x.shape(), 1.0);
    return x;
  }
  Tensor mask(x.shape());
  const double keep = 1.0 / (1.0 - p);
  for (auto& m : mask.values()) m = rng.uniform01() < p ? 0.0 : keep;
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  if (scale) *scale = std::move(mask);
  return out;
}

Tensor dropout_backward(const Tensor& dy, const Tensor& scale) {
  if (!dy.same_shape(scale)) throw ValidationError("dropout_backward: shape mismatch");
  Tensor out = dy;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= scale[i];
  return out;
}

std::vector<std::int32_t> argmax_rows(const Tensor& x) {
  require_matrix(x, "argmax_rows");
  std::vector<std::int32_t> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto r = x.row(i);
    out[i] = static_cast<std::int32_t>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

}  // namespace spiralnet
