#include "spiralnet/grad_fixtures.hpp"

#include "spiralnet/lstm.hpp"
#include "spiralnet/primitives.hpp"

namespace spiralnet {

GradCheckOptions lstm_sequence_check_options() {
  GradCheckOptions o;
  o.order = 4;
  o.step = 1e-3;
  o.denominator_floor = 1e-6;
  o.tolerance = 1e-5;
  return o;
}

GradCheckOptions network_check_options() {
  GradCheckOptions o;
  o.order = 2;
  o.step = 1e-5;
  o.denominator_floor = 1e-6;
  o.tolerance = 1e-4;
  return o;
}

GradCheckReport check_lstm_sequence_gradients(std::uint64_t seed,
                                              const GradCheckOptions& options) {
  constexpr std::size_t kBatch = 3, kSteps = 5, kIn = 4, kHidden = 6;
  Rng rng(seed);
  LstmParams params = LstmParams::glorot(kIn, kHidden, rng);
  for (Tensor* b : {&params.b_f, &params.b_i, &params.b_o, &params.b_c}) {
    for (auto& x : b->storage()) x = 0.5 * rng.normal();
  }
  LstmParams grads = LstmParams::zeros(kIn, kHidden);

  Tensor xs({kBatch, kSteps, kIn});
  for (auto& x : xs.storage()) x = rng.normal();
  Tensor dxs({kBatch, kSteps, kIn});
  std::vector<std::uint8_t> mask(kBatch * kSteps, 1);
  mask[1 * kSteps + 3] = mask[1 * kSteps + 4] = 0;
  mask[2 * kSteps + 4] = 0;

  Tensor r({kBatch, kHidden}), s({kBatch, kSteps, kHidden});
  for (auto& x : r.storage()) x = rng.normal();
  for (auto& x : s.storage()) x = rng.normal();

  ParamList list = {
      {"w_f", &params.w_f, &grads.w_f}, {"w_i", &params.w_i, &grads.w_i},
      {"w_o", &params.w_o, &grads.w_o}, {"w_c", &params.w_c, &grads.w_c},
      {"b_f", &params.b_f, &grads.b_f}, {"b_i", &params.b_i, &grads.b_i},
      {"b_o", &params.b_o, &grads.b_o}, {"b_c", &params.b_c, &grads.b_c},
      {"inputs", &xs, &dxs},
  };
  auto loss = [&] {
    Tensor seq;
    const Tensor last = lstm_sequence(xs, mask, params, &seq);
    double l = 0.0;
    for (std::size_t i = 0; i < last.size(); ++i) l += last[i] * r[i];
    for (std::size_t i = 0; i < seq.size(); ++i) l += seq[i] * s[i];
    return l;
  };
  auto backward = [&] {
    Tensor seq;
    LstmSequenceCache cache;
    lstm_sequence(xs, mask, params, &seq, &cache);
    dxs = lstm_sequence_backward(cache, params, &r, &s, grads);
  };
  return grad_check(loss, backward, list, options);
}

GradCheckReport check_network_gradients(NetworkKind kind, std::uint64_t seed,
                                        const GradCheckOptions& options) {
  const HalfEdgeMesh mesh = HalfEdgeMesh::build(make_grid(2, 5));
  const std::size_t v = mesh.vertex_count();
  Rng rng(seed);
  FeatureMatrix features = FeatureMatrix::zeros(v, 3, "random");
  for (auto& x : features.values) x = rng.normal();
  std::vector<std::int32_t> labels(v);
  for (auto& l : labels) l = static_cast<std::int32_t>(rng.uniform_index(v));

  NetworkSpec spec = kind == NetworkKind::lstm_net ? NetworkSpec::lstm_net(5, 6, v)
                                                   : NetworkSpec::fcs_net(5, 6, v);
  spec.embed_width = 8;
  spec.encoder_widths = {8, 8, 8};
  spec.head_width = 8;
  CorrespondenceModel model = CorrespondenceModel::build(spec, rng);
  // Nonzero biases keep the check away from the symmetric starting point.
  for (auto& p : model.parameters()) {
    if (p.name.ends_with("bias") || p.name.find(".b_") != std::string::npos) {
      for (auto& x : p.value->storage()) x = 0.5 * rng.normal();
    }
  }
  const SerializedBatch batch = serialize_batch(mesh, features, {spec.seq_len, true}, rng);

  Rng unused(0);
  auto loss = [&] { return cross_entropy(model.predict(batch), labels); };
  auto backward = [&] { model.forward_backward(batch, labels, Mode::eval, unused); };
  return grad_check(loss, backward, model.parameters(), options);
}

}  // namespace spiralnet
