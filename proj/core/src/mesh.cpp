#include "spiralnet/mesh.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "spiralnet/error.hpp"

namespace spiralnet {

namespace {

std::uint64_t directed_key(VertexId u, VertexId v) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
         static_cast<std::uint32_t>(v);
}

std::string edge_name(VertexId u, VertexId v) {
  return "edge " + std::to_string(std::min(u, v)) + "-" + std::to_string(std::max(u, v));
}

// Union-find over the incident faces of one vertex.
struct FanComponents {
  std::vector<std::size_t> parent;

  explicit FanComponents(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

std::string Violation::to_line() const {
  return std::string(severity == Severity::error ? "error" : "warning") + "\t" + element +
         "\t" + message;
}

std::size_t ValidationReport::count_containing(const std::string& needle) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [&](const Violation& v) {
        return v.message.find(needle) != std::string::npos;
      }));
}

void ValidationReport::print(std::ostream& out) const {
  for (const auto& v : violations) out << v.to_line() << '\n';
}

ValidationReport validate_manifold(const TriangleSoup& soup) {
  ValidationReport report;
  auto add = [&](std::string element, std::string message) {
    report.violations.push_back({Severity::error, std::move(element), std::move(message)});
  };

  const auto vcount = static_cast<VertexId>(soup.positions.size());
  std::vector<char> usable(soup.faces.size(), 1);

  std::map<std::array<VertexId, 3>, std::size_t> seen_faces;
  for (std::size_t f = 0; f < soup.faces.size(); ++f) {
    const auto& tri = soup.faces[f];
    const std::string name = "face " + std::to_string(f);
    if (std::any_of(tri.begin(), tri.end(), [&](VertexId v) { return v < 0 || v >= vcount; })) {
      add(name, "vertex index out of range");
      usable[f] = 0;
      continue;
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      add(name, "degenerate face (repeated vertex)");
      usable[f] = 0;
      continue;
    }
    auto sorted = tri;
    std::sort(sorted.begin(), sorted.end());
    auto [it, inserted] = seen_faces.emplace(sorted, f);
    if (!inserted) {
      add(name, "duplicate of face " + std::to_string(it->second));
      usable[f] = 0;
    }
  }

  // Undirected edge -> list of (face, traverses min->max).
  struct EdgeUse {
    std::size_t face;
    bool forward;
  };
  std::map<std::pair<VertexId, VertexId>, std::vector<EdgeUse>> edges;
  for (std::size_t f = 0; f < soup.faces.size(); ++f) {
    if (!usable[f]) continue;
    const auto& tri = soup.faces[f];
    for (int j = 0; j < 3; ++j) {
      const VertexId u = tri[j];
      const VertexId v = tri[(j + 1) % 3];
      edges[{std::min(u, v), std::max(u, v)}].push_back({f, u < v});
    }
  }
  for (const auto& [edge, uses] : edges) {
    if (uses.size() > 2) {
      add(edge_name(edge.first, edge.second),
          "non-manifold edge shared by " + std::to_string(uses.size()) + " faces");
    } else if (uses.size() == 2 && uses[0].forward == uses[1].forward) {
      add(edge_name(edge.first, edge.second),
          "inconsistent orientation between faces " + std::to_string(uses[0].face) + " and " +
              std::to_string(uses[1].face));
    }
  }

  // Vertex fans: incident faces must be connected through shared edges.
  std::vector<std::vector<std::size_t>> incident(soup.positions.size());
  for (std::size_t f = 0; f < soup.faces.size(); ++f) {
    if (!usable[f]) continue;
    for (VertexId v : soup.faces[f]) incident[static_cast<std::size_t>(v)].push_back(f);
  }
  for (std::size_t v = 0; v < incident.size(); ++v) {
    const auto& fs = incident[v];
    if (fs.size() < 2) continue;
    FanComponents components(fs.size());
    std::map<VertexId, std::size_t> first_face_with_spoke;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      for (VertexId w : soup.faces[fs[i]]) {
        if (static_cast<std::size_t>(w) == v) continue;
        auto [it, inserted] = first_face_with_spoke.emplace(w, i);
        if (!inserted) components.unite(i, it->second);
      }
    }
    std::size_t roots = 0;
    for (std::size_t i = 0; i < fs.size(); ++i) roots += components.find(i) == i;
    if (roots > 1) {
      add("vertex " + std::to_string(v),
          "non-manifold vertex: incident faces form " + std::to_string(roots) + " fans");
    }
  }
  return report;
}

HalfEdgeMesh HalfEdgeMesh::build(TriangleSoup soup) {
  const auto report = validate_manifold(soup);
  if (!report.ok()) {
    std::ostringstream msg;
    msg << "mesh is not a manifold triangle mesh (" << report.violations.size()
        << " violations); first: " << report.violations.front().element << ": "
        << report.violations.front().message;
    throw ValidationError(msg.str());
  }

  HalfEdgeMesh mesh;
  mesh.positions_ = std::move(soup.positions);
  mesh.faces_ = std::move(soup.faces);

  const std::size_t nh = mesh.faces_.size() * 3;
  mesh.origin_.resize(nh);
  mesh.twin_.assign(nh, kNoHalfEdge);
  std::unordered_map<std::uint64_t, HalfEdgeId> by_key;
  by_key.reserve(nh);
  for (std::size_t f = 0; f < mesh.faces_.size(); ++f) {
    for (int j = 0; j < 3; ++j) {
      const auto h = static_cast<HalfEdgeId>(3 * f + static_cast<std::size_t>(j));
      mesh.origin_[static_cast<std::size_t>(h)] = mesh.faces_[f][j];
      by_key.emplace(directed_key(mesh.faces_[f][j], mesh.faces_[f][(j + 1) % 3]), h);
    }
  }
  std::size_t boundary_halfedges = 0;
  for (std::size_t h = 0; h < nh; ++h) {
    const auto hid = static_cast<HalfEdgeId>(h);
    const auto it = by_key.find(directed_key(mesh.target(hid), mesh.origin(hid)));
    if (it != by_key.end()) {
      mesh.twin_[h] = it->second;
    } else {
      ++boundary_halfedges;
    }
  }
  mesh.edge_count_ = (nh + boundary_halfedges) / 2;
  mesh.build_fans();
  return mesh;
}

void HalfEdgeMesh::build_fans() {
  const std::size_t nv = positions_.size();
  outgoing_.assign(nv, kNoHalfEdge);
  boundary_.assign(nv, 0);
  for (std::size_t h = 0; h < origin_.size(); ++h) {
    auto& out = outgoing_[static_cast<std::size_t>(origin_[h])];
    if (out == kNoHalfEdge) out = static_cast<HalfEdgeId>(h);
  }

  fan_offsets_.assign(nv + 1, 0);
  fan_vertices_.clear();
  fan_vertices_.reserve(origin_.size() + nv);
  for (std::size_t v = 0; v < nv; ++v) {
    fan_offsets_[v] = fan_vertices_.size();
    HalfEdgeId h = outgoing_[v];
    if (h == kNoHalfEdge) continue;

    // Rotate with the winding (h -> twin(prev(h))) to the first face of an
    // open chain, if there is one.
    const HalfEdgeId first = h;
    bool open = false;
    while (true) {
      const HalfEdgeId back = twin(prev(h));
      if (back == kNoHalfEdge) {
        open = true;
        break;
      }
      h = back;
      if (h == first) break;
    }
    outgoing_[v] = h;
    boundary_[v] = open ? 1 : 0;

    if (open) fan_vertices_.push_back(origin(prev(h)));
    const HalfEdgeId start = h;
    while (true) {
      fan_vertices_.push_back(target(h));
      const HalfEdgeId t = twin(h);
      if (t == kNoHalfEdge) break;
      h = next(t);
      if (h == start) break;
    }
  }
  fan_offsets_[nv] = fan_vertices_.size();
}

long HalfEdgeMesh::euler_characteristic() const {
  return static_cast<long>(vertex_count()) - static_cast<long>(edge_count()) +
         static_cast<long>(face_count());
}

std::span<const VertexId> HalfEdgeMesh::fan(VertexId v) const {
  const auto i = static_cast<std::size_t>(v);
  return {fan_vertices_.data() + fan_offsets_[i], fan_offsets_[i + 1] - fan_offsets_[i]};
}

bool HalfEdgeMesh::adjacent(VertexId u, VertexId v) const {
  if (!is_valid_vertex(u) || !is_valid_vertex(v)) return false;
  const auto ring = fan(u);
  return std::find(ring.begin(), ring.end(), v) != ring.end();
}

double HalfEdgeMesh::surface_area() const {
  double area = 0.0;
  for (const auto& tri : faces_) {
    const Vec3 a = position(tri[0]);
    area += 0.5 * norm(cross(position(tri[1]) - a, position(tri[2]) - a));
  }
  return area;
}

HalfEdgeMesh HalfEdgeMesh::with_positions(std::vector<Vec3> positions) const {
  if (positions.size() != positions_.size()) {
    throw ValidationError("with_positions: expected " + std::to_string(positions_.size()) +
                          " positions, got " + std::to_string(positions.size()));
  }
  HalfEdgeMesh copy = *this;
  copy.positions_ = std::move(positions);
  return copy;
}

HalfEdgeMesh HalfEdgeMesh::with_flipped_winding() const {
  TriangleSoup soup = to_soup();
  for (auto& tri : soup.faces) std::swap(tri[1], tri[2]);
  return build(std::move(soup));
}

ValidationReport validate_manifold(const HalfEdgeMesh& mesh) {
  ValidationReport report;
  auto add = [&](std::string element, std::string message) {
    report.violations.push_back({Severity::error, std::move(element), std::move(message)});
  };
  const auto nh = static_cast<HalfEdgeId>(mesh.halfedge_count());
  for (HalfEdgeId h = 0; h < nh; ++h) {
    const std::string name = "halfedge " + std::to_string(h);
    if (mesh.next(mesh.next(mesh.next(h))) != h) add(name, "next^3 is not the identity");
    const HalfEdgeId t = mesh.twin(h);
    if (t == kNoHalfEdge) continue;
    if (mesh.twin(t) != h) add(name, "twin is not an involution");
    if (mesh.origin(t) != mesh.target(h) || mesh.target(t) != mesh.origin(h)) {
      add(name, "twin does not reverse the half-edge");
    }
  }
  // Fan coverage: every incident face contributes its two other vertices.
  std::vector<std::size_t> incident_faces(mesh.vertex_count(), 0);
  for (const auto& tri : mesh.faces()) {
    for (VertexId v : tri) ++incident_faces[static_cast<std::size_t>(v)];
  }
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    const auto vid = static_cast<VertexId>(v);
    const std::size_t expected =
        incident_faces[v] == 0 ? 0 : incident_faces[v] + (mesh.is_boundary_vertex(vid) ? 1 : 0);
    if (mesh.valence(vid) != expected) {
      add("vertex " + std::to_string(v), "one-ring fan does not cover all incident faces");
    }
  }
  return report;
}

std::vector<VertexId> ordered_one_ring(const HalfEdgeMesh& mesh, VertexId v, VertexId start) {
  if (!mesh.is_valid_vertex(v)) {
    throw ValidationError("ordered_one_ring: vertex " + std::to_string(v) + " out of range");
  }
  const auto ring = mesh.fan(v);
  const auto it = std::find(ring.begin(), ring.end(), start);
  if (it == ring.end()) {
    throw ValidationError("ordered_one_ring: vertex " + std::to_string(start) +
                          " is not adjacent to vertex " + std::to_string(v));
  }
  const auto pos = static_cast<std::size_t>(it - ring.begin());
  std::vector<VertexId> out;
  out.reserve(ring.size());
  if (!mesh.is_boundary_vertex(v)) {
    for (std::size_t i = 0; i < ring.size(); ++i) out.push_back(ring[(pos + i) % ring.size()]);
    return out;
  }
  for (std::size_t i = pos; i < ring.size(); ++i) out.push_back(ring[i]);
  for (std::size_t i = pos; i-- > 0;) out.push_back(ring[i]);
  return out;
}

}  // namespace spiralnet
