#include <benchmark/benchmark.h>

#include "spiralnet/features.hpp"
#include "spiralnet/geodesic.hpp"
#include "spiralnet/primitives.hpp"
#include "spiralnet/spiral.hpp"

namespace {

using namespace spiralnet;

const HalfEdgeMesh& grid() {
  static const HalfEdgeMesh mesh = HalfEdgeMesh::build(make_grid(100, 100));
  return mesh;
}

void bm_spiral_fixed(benchmark::State& state) {
  const auto& mesh = grid();
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    for (VertexId v = 0; v < static_cast<VertexId>(mesh.vertex_count()); ++v) {
      benchmark::DoNotOptimize(spiral_fixed(mesh, v, n, mesh.fan(v)[0]));
    }
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(mesh.vertex_count()));
}
BENCHMARK(bm_spiral_fixed)->Arg(15)->Arg(20)->Arg(30);

void bm_serialize_batch(benchmark::State& state) {
  const auto& mesh = grid();
  const auto features = raw_features(mesh, RawFeatureKind::position_normal);
  const SerializeOptions options{30, state.range(0) != 0, CenterDistance::euclidean};
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(serialize_batch(mesh, features, options, rng));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(mesh.vertex_count()));
}
BENCHMARK(bm_serialize_batch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void bm_geodesic_field(benchmark::State& state) {
  const auto& mesh = grid();
  for (auto _ : state) benchmark::DoNotOptimize(geodesic_distances(mesh, 0));
}
BENCHMARK(bm_geodesic_field)->Unit(benchmark::kMillisecond);

}  // namespace
