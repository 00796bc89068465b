#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "spiralnet/geometry.hpp"

namespace spiralnet {

/// Dense vertex index in [0, V). Negative values are sentinels.
using VertexId = std::int32_t;
using HalfEdgeId = std::int32_t;
using FaceId = std::int32_t;

/// Marks "no vertex": spiral padding, missing twin, unset start.
inline constexpr VertexId kNoVertex = -1;
inline constexpr HalfEdgeId kNoHalfEdge = -1;

using Triangle = std::array<VertexId, 3>;

/// Raw indexed triangle list as read from disk, before any topology checks.
struct TriangleSoup {
  std::vector<Vec3> positions;
  std::vector<Triangle> faces;
};

enum class Severity { error, warning };

struct Violation {
  Severity severity = Severity::error;
  std::string element;  // e.g. "vertex 3", "edge 1-4", "face 7"
  std::string message;

  /// `<severity>\t<element>\t<message>`
  std::string to_line() const;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count_containing(const std::string& needle) const;
  void print(std::ostream& out) const;
};

/// Checks everything HalfEdgeMesh requires: index range, degenerate and
/// duplicate faces, edges with more than two faces, inconsistent winding
/// across shared edges, and vertices whose incident faces do not form a
/// single fan.
ValidationReport validate_manifold(const TriangleSoup& soup);

/// Immutable manifold triangle mesh with half-edge connectivity.
///
/// Half-edge 3f+j runs from faces[f][j] to faces[f][(j+1)%3]. Boundary
/// half-edges have no twin. Each vertex also caches its one-ring "fan":
/// neighbours in traversal order, i.e. rotating against the face winding
/// (h -> next(twin(h))). For boundary vertices the fan is the open chain in
/// that order.
class HalfEdgeMesh {
 public:
  HalfEdgeMesh() = default;

  /// Throws ValidationError when validate_manifold reports any error.
  static HalfEdgeMesh build(TriangleSoup soup);

  std::size_t vertex_count() const { return positions_.size(); }
  std::size_t face_count() const { return faces_.size(); }
  std::size_t halfedge_count() const { return origin_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  long euler_characteristic() const;

  const std::vector<Vec3>& positions() const { return positions_; }
  const Vec3& position(VertexId v) const { return positions_[static_cast<std::size_t>(v)]; }
  std::span<const Triangle> faces() const { return faces_; }

  HalfEdgeId twin(HalfEdgeId h) const { return twin_[static_cast<std::size_t>(h)]; }
  HalfEdgeId next(HalfEdgeId h) const { return h - h % 3 + (h % 3 + 1) % 3; }
  HalfEdgeId prev(HalfEdgeId h) const { return h - h % 3 + (h % 3 + 2) % 3; }
  VertexId origin(HalfEdgeId h) const { return origin_[static_cast<std::size_t>(h)]; }
  VertexId target(HalfEdgeId h) const { return origin(next(h)); }
  FaceId face(HalfEdgeId h) const { return h / 3; }
  /// Some outgoing half-edge of v; for boundary vertices the one whose face
  /// is first in traversal order. kNoHalfEdge for isolated vertices.
  HalfEdgeId outgoing(VertexId v) const { return outgoing_[static_cast<std::size_t>(v)]; }

  bool is_boundary_vertex(VertexId v) const { return boundary_[static_cast<std::size_t>(v)] != 0; }
  bool is_valid_vertex(VertexId v) const {
    return v >= 0 && static_cast<std::size_t>(v) < positions_.size();
  }

  /// One-ring neighbours in traversal order (see class comment).
  std::span<const VertexId> fan(VertexId v) const;
  std::size_t valence(VertexId v) const { return fan(v).size(); }
  bool adjacent(VertexId u, VertexId v) const;

  double surface_area() const;

  /// Same connectivity with new vertex positions (rigid motions, scaling).
  HalfEdgeMesh with_positions(std::vector<Vec3> positions) const;
  /// Same positions with every face winding reversed.
  HalfEdgeMesh with_flipped_winding() const;

  TriangleSoup to_soup() const { return {positions_, faces_}; }

 private:
  void build_fans();

  std::vector<Vec3> positions_;
  std::vector<Triangle> faces_;
  std::vector<HalfEdgeId> twin_;
  std::vector<VertexId> origin_;
  std::vector<HalfEdgeId> outgoing_;
  std::vector<std::uint8_t> boundary_;
  std::vector<std::size_t> fan_offsets_;
  std::vector<VertexId> fan_vertices_;
  std::size_t edge_count_ = 0;
};

/// Re-checks the half-edge invariants of an already built mesh
/// (next^3 = id, twin involution, fan coverage). Empty for any mesh that
/// HalfEdgeMesh::build accepted.
ValidationReport validate_manifold(const HalfEdgeMesh& mesh);

/// All one-ring neighbours of v, each once, beginning at `start` and
/// proceeding in traversal order. On a boundary vertex the walk runs from
/// `start` to the end of the chain, then continues on the other side of
/// `start` towards the other chain end.
/// Throws ValidationError if start is not adjacent to v.
std::vector<VertexId> ordered_one_ring(const HalfEdgeMesh& mesh, VertexId v, VertexId start);

}  // namespace spiralnet
