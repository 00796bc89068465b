#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "spiralnet/mesh.hpp"
#include "spiralnet/random.hpp"

namespace spiralnet {

/// Ordered BFS layers around a center vertex. rings[0] = {center};
/// rings[i+1] holds the unvisited neighbours of rings[i].
struct RingDecomposition {
  VertexId center = kNoVertex;
  std::vector<std::vector<VertexId>> rings;

  std::size_t disk_size() const;
  std::vector<std::size_t> ring_sizes() const;
};

/// Rings 0..k around v. The 1-ring starts at `start` (default: the first
/// vertex of v's stored fan) and runs in traversal order. Every deeper ring
/// is ordered by its inner neighbours: walking the previous ring in order,
/// each vertex w contributes its not-yet-seen outer neighbours in traversal
/// order around w, beginning at w's sequence predecessor (or, when that is
/// not adjacent to w, at w's earliest inner neighbour).
RingDecomposition ring_decompose(const HalfEdgeMesh& mesh, VertexId v, std::size_t k,
                                 VertexId start = kNoVertex);

enum class SpiralMode { by_ring, fixed_length };

enum class PadPolicy {
  sentinel,  // fill with kNoVertex, mask false
  fail,      // throw ValidationError when the mesh runs out of vertices
};

struct SpiralSequence {
  std::vector<VertexId> vertices;     // center first; kNoVertex marks padding
  std::vector<std::uint8_t> pad_mask; // 1 = real vertex, 0 = padding
  std::vector<int> ring_index;        // BFS depth per entry, -1 for padding
  VertexId start_neighbor = kNoVertex;
  SpiralMode mode = SpiralMode::by_ring;
  std::size_t extent = 0;             // k for by_ring, N for fixed_length

  std::size_t size() const { return vertices.size(); }
  VertexId center() const { return vertices.front(); }
  std::size_t real_count() const;
};

/// Concatenation of the ordered rings 0..k.
/// Throws ValidationError if start is not adjacent to v. When v is isolated,
/// start must be kNoVertex and the result is just [v].
SpiralSequence spiral_by_ring(const HalfEdgeMesh& mesh, VertexId v, std::size_t k,
                              VertexId start);

/// The spiral truncated to exactly n entries. Rings are grown until n
/// vertices are enumerated or the component is exhausted; the last ring is
/// cut mid-ring. Short spirals are padded per `pad`.
SpiralSequence spiral_fixed(const HalfEdgeMesh& mesh, VertexId v, std::size_t n, VertexId start,
                            PadPolicy pad = PadPolicy::sentinel);

/// Uniformly random one-ring neighbour of v. Throws ValidationError for
/// isolated vertices.
VertexId random_start(const HalfEdgeMesh& mesh, VertexId v, Rng& rng);

}  // namespace spiralnet
