#include <benchmark/benchmark.h>

#include "spiralnet/features.hpp"
#include "spiralnet/model.hpp"
#include "spiralnet/primitives.hpp"

namespace {

using namespace spiralnet;

// Default widths on a 1,000-vertex grid with 544-dim random descriptors.
struct Fixture {
  HalfEdgeMesh mesh = HalfEdgeMesh::build(make_grid(25, 40));
  FeatureMatrix features;
  Fixture() {
    features = FeatureMatrix::zeros(mesh.vertex_count(), 544);
    Rng rng(3);
    for (auto& x : features.values) x = rng.normal();
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void bm_forward(benchmark::State& state, NetworkKind kind, std::size_t seq_len) {
  const auto& fx = fixture();
  const auto spec = kind == NetworkKind::lstm_net ? NetworkSpec::lstm_net(544, seq_len, 1000)
                                                  : NetworkSpec::fcs_net(544, seq_len, 1000);
  Rng rng(1);
  const auto model = CorrespondenceModel::build(spec, rng);
  const auto batch = serialize_batch(fx.mesh, fx.features, {seq_len, false, CenterDistance::euclidean}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(batch));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch.vertices));
}

void bm_train_step(benchmark::State& state, NetworkKind kind, std::size_t seq_len) {
  const auto& fx = fixture();
  const auto spec = kind == NetworkKind::lstm_net ? NetworkSpec::lstm_net(544, seq_len, 1000)
                                                  : NetworkSpec::fcs_net(544, seq_len, 1000);
  Rng rng(1);
  auto model = CorrespondenceModel::build(spec, rng);
  const auto batch = serialize_batch(fx.mesh, fx.features, {seq_len, false, CenterDistance::euclidean}, rng);
  std::vector<std::int32_t> labels(batch.vertices);
  for (std::size_t v = 0; v < labels.size(); ++v) labels[v] = static_cast<std::int32_t>(v);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward_backward(batch, labels, Mode::train, rng));
}

BENCHMARK_CAPTURE(bm_forward, lstm_n15, NetworkKind::lstm_net, 15)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_forward, lstm_n30, NetworkKind::lstm_net, 30)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_forward, fcs_n20, NetworkKind::fcs_net, 20)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_train_step, lstm_n30, NetworkKind::lstm_net, 30)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_train_step, fcs_n20, NetworkKind::fcs_net, 20)->Unit(benchmark::kMillisecond);

}  // namespace
