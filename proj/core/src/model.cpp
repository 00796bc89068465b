#include "spiralnet/model.hpp"

#include <algorithm>
#include <cmath>

#include "spiralnet/error.hpp"

namespace spiralnet {

std::string to_string(NetworkKind kind) {
  return kind == NetworkKind::lstm_net ? "lstm-net" : "fcs-net";
}

std::optional<NetworkKind> parse_network_kind(std::string_view name) {
  if (name == "lstm" || name == "lstm-net") return NetworkKind::lstm_net;
  if (name == "fcs" || name == "fcs-net") return NetworkKind::fcs_net;
  return std::nullopt;
}

NetworkSpec NetworkSpec::lstm_net(std::size_t input_dim, std::size_t seq_len, std::size_t classes) {
  NetworkSpec s;
  s.kind = NetworkKind::lstm_net;
  s.input_dim = input_dim;
  s.seq_len = seq_len;
  s.encoder_widths = {150, 200, 250};
  s.classes = classes;
  return s;
}

NetworkSpec NetworkSpec::fcs_net(std::size_t input_dim, std::size_t seq_len, std::size_t classes) {
  NetworkSpec s;
  s.kind = NetworkKind::fcs_net;
  s.input_dim = input_dim;
  s.seq_len = seq_len;
  s.encoder_widths = {100, 150, 200};
  s.classes = classes;
  return s;
}

void NetworkSpec::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError("network spec: " + what);
  };
  require(input_dim >= 1, "input_dim must be >= 1");
  require(seq_len >= 1, "seq_len must be >= 1");
  require(embed_width >= 1 && head_width >= 1, "layer widths must be >= 1");
  for (auto w : encoder_widths) require(w >= 1, "layer widths must be >= 1");
  require(classes >= 1, "classes must be >= 1");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0, 1)");
  require(std::isfinite(forget_bias), "forget_bias must be finite");
}

std::vector<LayerParamCount> layer_param_counts(const NetworkSpec& spec) {
  auto fc = [](std::size_t in, std::size_t out) { return in * out + out; };
  std::vector<LayerParamCount> layers;
  layers.push_back({"FC" + std::to_string(spec.embed_width), fc(spec.input_dim, spec.embed_width)});
  std::size_t in = spec.embed_width;
  for (std::size_t w : spec.encoder_widths) {
    if (spec.kind == NetworkKind::lstm_net) {
      layers.push_back({"LSTM" + std::to_string(w), 4 * ((in + w) * w + w)});
    } else {
      layers.push_back({"FCS" + std::to_string(w), fc(spec.seq_len * in, w)});
    }
    in = w;
  }
  layers.push_back({"FC" + std::to_string(spec.head_width), fc(in, spec.head_width)});
  layers.push_back({"FC" + std::to_string(spec.classes), fc(spec.head_width, spec.classes)});
  return layers;
}

std::size_t count_params(const NetworkSpec& spec) {
  std::size_t total = 0;
  for (const auto& layer : layer_param_counts(spec)) total += layer.count;
  return total;
}

// ------------------------------------------------------------------ model

CorrespondenceModel::CorrespondenceModel(NetworkSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  embed_ = LinearParams::zeros(spec_.input_dim, spec_.embed_width);
  std::size_t in = spec_.embed_width;
  for (std::size_t l = 0; l < 3; ++l) {
    const std::size_t w = spec_.encoder_widths[l];
    if (spec_.kind == NetworkKind::lstm_net) {
      lstm_[l] = LstmParams::zeros(in, w);
    } else {
      fcs_[l] = LinearParams::zeros(spec_.seq_len * in, w);
    }
    in = w;
  }
  head_ = LinearParams::zeros(in, spec_.head_width);
  output_ = LinearParams::zeros(spec_.head_width, spec_.classes);

  embed_grad_ = embed_;
  head_grad_ = head_;
  output_grad_ = output_;
  lstm_grad_ = lstm_;
  fcs_grad_ = fcs_;
}

CorrespondenceModel CorrespondenceModel::build(const NetworkSpec& spec, Rng& rng) {
  CorrespondenceModel model(spec);
  auto init_fc = [&](LinearParams& p) {
    glorot_uniform(p.weight, p.input_dim(), p.output_dim(), rng);
  };
  init_fc(model.embed_);
  std::size_t in = spec.embed_width;
  for (std::size_t l = 0; l < 3; ++l) {
    if (spec.kind == NetworkKind::lstm_net) {
      model.lstm_[l] = LstmParams::glorot(in, spec.encoder_widths[l], rng, spec.forget_bias);
    } else {
      init_fc(model.fcs_[l]);
    }
    in = spec.encoder_widths[l];
  }
  init_fc(model.head_);
  init_fc(model.output_);
  return model;
}

ParamList CorrespondenceModel::parameters() {
  ParamList list;
  auto add_fc = [&](const std::string& name, LinearParams& p, LinearParams& g) {
    list.push_back({name + ".weight", &p.weight, &g.weight});
    list.push_back({name + ".bias", &p.bias, &g.bias});
  };
  add_fc("embed", embed_, embed_grad_);
  for (std::size_t l = 0; l < 3; ++l) {
    const std::string name = "encoder" + std::to_string(l + 1);
    if (spec_.kind == NetworkKind::lstm_net) {
      auto& p = lstm_[l];
      auto& g = lstm_grad_[l];
      list.push_back({name + ".w_f", &p.w_f, &g.w_f});
      list.push_back({name + ".w_i", &p.w_i, &g.w_i});
      list.push_back({name + ".w_o", &p.w_o, &g.w_o});
      list.push_back({name + ".w_c", &p.w_c, &g.w_c});
      list.push_back({name + ".b_f", &p.b_f, &g.b_f});
      list.push_back({name + ".b_i", &p.b_i, &g.b_i});
      list.push_back({name + ".b_o", &p.b_o, &g.b_o});
      list.push_back({name + ".b_c", &p.b_c, &g.b_c});
    } else {
      add_fc(name, fcs_[l], fcs_grad_[l]);
    }
  }
  add_fc("head", head_, head_grad_);
  add_fc("output", output_, output_grad_);
  return list;
}

std::vector<std::pair<std::string, const Tensor*>> CorrespondenceModel::named_tensors() const {
  std::vector<std::pair<std::string, const Tensor*>> out;
  for (const auto& p : const_cast<CorrespondenceModel*>(this)->parameters()) {
    out.emplace_back(p.name, p.value);
  }
  return out;
}

std::size_t CorrespondenceModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : named_tensors()) n += t->size();
  return n;
}

void CorrespondenceModel::check_batch(const SerializedBatch& batch) const {
  if (batch.dim != spec_.input_dim) {
    throw ValidationError("model expects input dimension " + std::to_string(spec_.input_dim) +
                          ", batch has " + std::to_string(batch.dim));
  }
  if (spec_.kind == NetworkKind::fcs_net && batch.steps != spec_.seq_len) {
    throw ValidationError("fcs-net expects sequence length " + std::to_string(spec_.seq_len) +
                          ", batch has " + std::to_string(batch.steps));
  }
  if (batch.vertices == 0 || batch.steps == 0) throw ValidationError("model: empty batch");
}

// Everything the backward pass needs from one forward pass.
struct CorrespondenceModel::Trace {
  Tensor x0;          // (V*N) x D
  Tensor embed_act;   // relu(embed) before dropout
  Tensor embed_drop;  // dropout scale
  Tensor embed_out;   // encoder input: V x N x E (lstm) or (V*N) x E masked (fcs)

  // lstm-net
  std::array<LstmSequenceCache, 3> lstm_cache;
  std::array<Tensor, 2> lstm_seq_relu;  // relu'd hidden sequences feeding layers 2, 3
  Tensor encoder_out;                   // relu'd last-step output of layer 3 / fcs layer 3

  // fcs-net
  std::array<Tensor, 3> fcs_in;   // gathered inputs V x (N * d)
  std::array<Tensor, 3> fcs_out;  // relu outputs V x w

  Tensor head_act;
  Tensor head_drop;
  Tensor head_out;
  Tensor probs;
};

namespace {

// V x (N*d) matrix: row v concatenates src rows of the spiral vertices of
// v, zero where the spiral is padded.
Tensor gather_along_spirals(const SerializedBatch& batch, const Tensor& src) {
  const std::size_t d = src.cols();
  Tensor out({batch.vertices, batch.steps * d});
  for (std::size_t v = 0; v < batch.vertices; ++v) {
    double* dst = out.data() + v * batch.steps * d;
    for (std::size_t t = 0; t < batch.steps; ++t) {
      if (!batch.real(v, t)) continue;
      const auto row = src.row(static_cast<std::size_t>(batch.spiral_at(v, t)));
      std::copy(row.begin(), row.end(), dst + t * d);
    }
  }
  return out;
}

// Transpose of gather_along_spirals; fixed (v, t) order keeps the sums
// deterministic.
Tensor scatter_along_spirals(const SerializedBatch& batch, const Tensor& grad, std::size_t d) {
  Tensor out({batch.vertices, d});
  for (std::size_t v = 0; v < batch.vertices; ++v) {
    const double* src = grad.data() + v * batch.steps * d;
    for (std::size_t t = 0; t < batch.steps; ++t) {
      if (!batch.real(v, t)) continue;
      double* dst = out.data() + static_cast<std::size_t>(batch.spiral_at(v, t)) * d;
      for (std::size_t k = 0; k < d; ++k) dst[k] += src[t * d + k];
    }
  }
  return out;
}

void apply_step_mask(const SerializedBatch& batch, Tensor& per_step) {
  const std::size_t d = per_step.cols();
  for (std::size_t i = 0; i < batch.vertices * batch.steps; ++i) {
    if (batch.mask[i]) continue;
    std::fill(per_step.data() + i * d, per_step.data() + (i + 1) * d, 0.0);
  }
}

}  // namespace

Tensor CorrespondenceModel::run_forward(const SerializedBatch& batch, Mode mode, Rng* rng,
                                        Trace* trace) const {
  check_batch(batch);
  if (mode == Mode::train && rng == nullptr) {
    throw ValidationError("model: train mode needs a generator for dropout");
  }
  Rng unused(0);
  Rng& drop_rng = rng ? *rng : unused;
  const std::size_t nv = batch.vertices, ns = batch.steps;

  Tensor x0({nv * ns, batch.dim}, batch.inputs);
  Tensor embed_act = relu(fc_forward(x0, embed_));
  Tensor embed_drop;
  Tensor embed_out = dropout(embed_act, spec_.dropout, mode, drop_rng, &embed_drop);

  Tensor encoded;
  if (spec_.kind == NetworkKind::lstm_net) {
    Tensor seq = embed_out;
    seq.reshape({nv, ns, spec_.embed_width});
    for (std::size_t l = 0; l < 3; ++l) {
      LstmSequenceCache* cache = trace ? &trace->lstm_cache[l] : nullptr;
      if (l < 2) {
        Tensor hidden;
        lstm_sequence(seq, batch.mask, lstm_[l], &hidden, cache);
        seq = relu(hidden);
        if (trace) trace->lstm_seq_relu[l] = seq;
      } else {
        encoded = relu(lstm_sequence(seq, batch.mask, lstm_[l], nullptr, cache));
      }
    }
    if (trace) trace->embed_out = std::move(embed_out);
  } else {
    apply_step_mask(batch, embed_out);
    Tensor g = embed_out;
    g.reshape({nv, ns * spec_.embed_width});
    for (std::size_t l = 0; l < 3; ++l) {
      if (l > 0) g = gather_along_spirals(batch, encoded);
      encoded = relu(fc_forward(g, fcs_[l]));
      if (trace) {
        trace->fcs_in[l] = std::move(g);
        trace->fcs_out[l] = encoded;
      }
    }
  }

  Tensor head_act = relu(fc_forward(encoded, head_));
  Tensor head_drop;
  Tensor head_out = dropout(head_act, spec_.dropout, mode, drop_rng, &head_drop);
  Tensor probs = softmax(fc_forward(head_out, output_));

  if (trace) {
    trace->x0 = std::move(x0);
    trace->embed_act = std::move(embed_act);
    trace->embed_drop = std::move(embed_drop);
    trace->encoder_out = std::move(encoded);
    trace->head_act = std::move(head_act);
    trace->head_drop = std::move(head_drop);
    trace->head_out = std::move(head_out);
    trace->probs = probs;
  }
  return probs;
}

Tensor CorrespondenceModel::forward(const SerializedBatch& batch, Mode mode, Rng& rng) const {
  return run_forward(batch, mode, &rng, nullptr);
}

Tensor CorrespondenceModel::predict(const SerializedBatch& batch) const {
  return run_forward(batch, Mode::eval, nullptr, nullptr);
}

CorrespondenceModel::StepResult CorrespondenceModel::forward_backward(
    const SerializedBatch& batch, std::span<const std::int32_t> labels, Mode mode, Rng& rng) {
  if (labels.size() != batch.vertices) {
    throw ValidationError("model: " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(batch.vertices) + " vertices");
  }
  zero_grads(parameters());
  Trace trace;
  const Tensor probs = run_forward(batch, mode, &rng, &trace);

  StepResult result;
  result.loss = cross_entropy(probs, labels);
  if (!std::isfinite(result.loss)) throw NumericError("model: non-finite loss");
  const auto predicted = argmax_rows(probs);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += predicted[i] == labels[i];
  result.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());

  const std::size_t nv = batch.vertices, ns = batch.steps;
  Tensor d_logits = softmax_cross_entropy_backward(probs, labels);
  Tensor d_head_out = fc_backward(trace.head_out, output_, d_logits, output_grad_);
  Tensor d_head_act = relu_backward(trace.head_act, dropout_backward(d_head_out, trace.head_drop));
  Tensor d_encoded = fc_backward(trace.encoder_out, head_, d_head_act, head_grad_);
  d_encoded = relu_backward(trace.encoder_out, d_encoded);

  Tensor d_embed_out;
  if (spec_.kind == NetworkKind::lstm_net) {
    Tensor d_seq = lstm_sequence_backward(trace.lstm_cache[2], lstm_[2], &d_encoded, nullptr,
                                          lstm_grad_[2]);
    for (std::size_t l = 2; l-- > 0;) {
      d_seq = relu_backward(trace.lstm_seq_relu[l], d_seq);
      d_seq = lstm_sequence_backward(trace.lstm_cache[l], lstm_[l], nullptr, &d_seq, lstm_grad_[l]);
    }
    d_embed_out = std::move(d_seq);
    d_embed_out.reshape({nv * ns, spec_.embed_width});
  } else {
    Tensor d_out = d_encoded;
    for (std::size_t l = 3; l-- > 0;) {
      if (l < 2) d_out = relu_backward(trace.fcs_out[l], d_out);
      Tensor d_in = fc_backward(trace.fcs_in[l], fcs_[l], d_out, fcs_grad_[l]);
      if (l > 0) {
        d_out = scatter_along_spirals(batch, d_in, spec_.encoder_widths[l - 1]);
      } else {
        d_embed_out = std::move(d_in);
      }
    }
    d_embed_out.reshape({nv * ns, spec_.embed_width});
    apply_step_mask(batch, d_embed_out);
  }
  Tensor d_embed_act =
      relu_backward(trace.embed_act, dropout_backward(d_embed_out, trace.embed_drop));
  fc_backward(trace.x0, embed_, d_embed_act, embed_grad_);
  return result;
}

}  // namespace spiralnet
