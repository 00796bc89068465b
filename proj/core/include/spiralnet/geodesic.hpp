#pragma once

#include <limits>
#include <span>
#include <vector>

#include "spiralnet/mesh.hpp"

namespace spiralnet {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Single-source shortest paths over the edge graph, Euclidean edge lengths
/// as weights. `normalization` is sqrt(total surface area), the scale used
/// by the correspondence error curves.
struct GeodesicField {
  VertexId source = kNoVertex;
  std::vector<double> distances;  // kUnreachable for other components
  double normalization = 1.0;

  bool reachable(VertexId v) const {
    return distances[static_cast<std::size_t>(v)] != kUnreachable;
  }
  double normalized(VertexId v) const {
    return distances[static_cast<std::size_t>(v)] / normalization;
  }
};

GeodesicField geodesic_distances(const HalfEdgeMesh& mesh, VertexId source);

/// Dijkstra that stops once every target is settled. Returns one distance
/// per target, in target order.
std::vector<double> geodesic_distances_to(const HalfEdgeMesh& mesh, VertexId source,
                                          std::span<const VertexId> targets);

}  // namespace spiralnet
