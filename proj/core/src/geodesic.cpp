#include "spiralnet/geodesic.hpp"

#include <cmath>
#include <functional>
#include <queue>
#include <unordered_map>

#include "spiralnet/error.hpp"

namespace spiralnet {

namespace {

using QueueEntry = std::pair<double, VertexId>;
using MinQueue = std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>>;

// Runs Dijkstra from source, calling settle(v) for each settled vertex in
// order. Stops early when settle returns false.
void dijkstra(const HalfEdgeMesh& mesh, VertexId source, std::vector<double>& dist,
              const std::function<bool(VertexId)>& settle) {
  if (!mesh.is_valid_vertex(source)) {
    throw ValidationError("geodesic: source vertex " + std::to_string(source) + " out of range");
  }
  dist.assign(mesh.vertex_count(), kUnreachable);
  std::vector<char> done(mesh.vertex_count(), 0);
  MinQueue queue;
  dist[static_cast<std::size_t>(source)] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    const auto ui = static_cast<std::size_t>(u);
    if (done[ui]) continue;
    done[ui] = 1;
    if (!settle(u)) return;
    const Vec3 pu = mesh.position(u);
    for (VertexId w : mesh.fan(u)) {
      const auto wi = static_cast<std::size_t>(w);
      if (done[wi]) continue;
      const double nd = d + distance(pu, mesh.position(w));
      if (nd < dist[wi]) {
        dist[wi] = nd;
        queue.emplace(nd, w);
      }
    }
  }
}

}  // namespace

GeodesicField geodesic_distances(const HalfEdgeMesh& mesh, VertexId source) {
  GeodesicField field;
  field.source = source;
  dijkstra(mesh, source, field.distances, [](VertexId) { return true; });
  const double area = mesh.surface_area();
  field.normalization = area > 0.0 ? std::sqrt(area) : 1.0;
  return field;
}

std::vector<double> geodesic_distances_to(const HalfEdgeMesh& mesh, VertexId source,
                                          std::span<const VertexId> targets) {
  std::unordered_map<VertexId, std::size_t> pending;
  for (VertexId t : targets) {
    if (!mesh.is_valid_vertex(t)) {
      throw ValidationError("geodesic: target vertex " + std::to_string(t) + " out of range");
    }
    pending.emplace(t, 0);
  }
  std::size_t remaining = pending.size();
  std::vector<double> dist;
  dijkstra(mesh, source, dist, [&](VertexId v) {
    if (pending.count(v) != 0) --remaining;
    return remaining > 0;
  });
  std::vector<double> out;
  out.reserve(targets.size());
  for (VertexId t : targets) out.push_back(dist[static_cast<std::size_t>(t)]);
  return out;
}

}  // namespace spiralnet
