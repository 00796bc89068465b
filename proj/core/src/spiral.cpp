#include "spiralnet/spiral.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "spiralnet/error.hpp"

namespace spiralnet {

namespace {

// Grows ordered rings one at a time, keeping track of sequence positions and
// each vertex's earliest inner neighbour.
class RingGrower {
 public:
  RingGrower(const HalfEdgeMesh& mesh, VertexId center, VertexId start) : mesh_(mesh) {
    if (!mesh.is_valid_vertex(center)) {
      throw ValidationError("spiral: vertex " + std::to_string(center) + " out of range");
    }
    const auto fan = mesh.fan(center);
    if (start == kNoVertex && !fan.empty()) start = fan.front();
    if (start != kNoVertex && !mesh.adjacent(center, start)) {
      throw ValidationError("spiral: start vertex " + std::to_string(start) +
                            " is not adjacent to vertex " + std::to_string(center));
    }
    start_ = start;
    visit(center, kNoVertex);
    rings_.push_back({center});
  }

  VertexId start() const { return start_; }
  const std::vector<std::vector<VertexId>>& rings() const { return rings_; }
  std::size_t enumerated() const { return sequence_.size(); }
  bool exhausted() const { return rings_.back().empty(); }

  void grow() {
    std::vector<VertexId> next;
    if (rings_.size() == 1) {
      if (start_ != kNoVertex) {
        for (VertexId u : ordered_one_ring(mesh_, rings_[0][0], start_)) {
          visit(u, rings_[0][0]);
          next.push_back(u);
        }
      }
    } else {
      for (VertexId w : rings_.back()) {
        for (VertexId u : ordered_one_ring(mesh_, w, anchor(w))) {
          if (position_.count(u) != 0) continue;
          visit(u, w);
          next.push_back(u);
        }
      }
    }
    rings_.push_back(std::move(next));
  }

 private:
  void visit(VertexId u, VertexId parent) {
    position_.emplace(u, sequence_.size());
    parent_.emplace(u, parent);
    sequence_.push_back(u);
  }

  VertexId anchor(VertexId w) const {
    const std::size_t pos = position_.at(w);
    const VertexId predecessor = sequence_[pos - 1];
    return mesh_.adjacent(w, predecessor) ? predecessor : parent_.at(w);
  }

  const HalfEdgeMesh& mesh_;
  VertexId start_ = kNoVertex;
  std::vector<std::vector<VertexId>> rings_;
  std::vector<VertexId> sequence_;
  std::unordered_map<VertexId, std::size_t> position_;
  std::unordered_map<VertexId, VertexId> parent_;
};

void append_rings(SpiralSequence& seq, const std::vector<std::vector<VertexId>>& rings,
                  std::size_t limit) {
  for (std::size_t depth = 0; depth < rings.size(); ++depth) {
    for (VertexId u : rings[depth]) {
      if (seq.vertices.size() >= limit) return;
      seq.vertices.push_back(u);
      seq.pad_mask.push_back(1);
      seq.ring_index.push_back(static_cast<int>(depth));
    }
  }
}

}  // namespace

std::size_t RingDecomposition::disk_size() const {
  std::size_t n = 0;
  for (const auto& r : rings) n += r.size();
  return n;
}

std::vector<std::size_t> RingDecomposition::ring_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(rings.size());
  for (const auto& r : rings) sizes.push_back(r.size());
  return sizes;
}

std::size_t SpiralSequence::real_count() const {
  return static_cast<std::size_t>(std::count(pad_mask.begin(), pad_mask.end(), 1));
}

RingDecomposition ring_decompose(const HalfEdgeMesh& mesh, VertexId v, std::size_t k,
                                 VertexId start) {
  RingGrower grower(mesh, v, start);
  for (std::size_t i = 0; i < k; ++i) grower.grow();
  return {v, grower.rings()};
}

SpiralSequence spiral_by_ring(const HalfEdgeMesh& mesh, VertexId v, std::size_t k,
                              VertexId start) {
  if (start == kNoVertex && mesh.is_valid_vertex(v) && mesh.valence(v) > 0) {
    throw ValidationError("spiral_by_ring: vertex " + std::to_string(v) +
                          " has neighbours but no start vertex was given");
  }
  RingGrower grower(mesh, v, start);
  for (std::size_t i = 0; i < k; ++i) grower.grow();
  SpiralSequence seq;
  seq.mode = SpiralMode::by_ring;
  seq.extent = k;
  seq.start_neighbor = grower.start();
  append_rings(seq, grower.rings(), std::numeric_limits<std::size_t>::max());
  return seq;
}

SpiralSequence spiral_fixed(const HalfEdgeMesh& mesh, VertexId v, std::size_t n, VertexId start,
                            PadPolicy pad) {
  if (n == 0) throw ValidationError("spiral_fixed: sequence length must be at least 1");
  if (start == kNoVertex && mesh.is_valid_vertex(v) && mesh.valence(v) > 0) {
    throw ValidationError("spiral_fixed: vertex " + std::to_string(v) +
                          " has neighbours but no start vertex was given");
  }
  RingGrower grower(mesh, v, start);
  while (grower.enumerated() < n && !grower.exhausted()) grower.grow();

  SpiralSequence seq;
  seq.mode = SpiralMode::fixed_length;
  seq.extent = n;
  seq.start_neighbor = grower.start();
  seq.vertices.reserve(n);
  append_rings(seq, grower.rings(), n);
  if (seq.vertices.size() < n) {
    if (pad == PadPolicy::fail) {
      throw ValidationError("spiral_fixed: vertex " + std::to_string(v) + " reaches only " +
                            std::to_string(seq.vertices.size()) + " of " + std::to_string(n) +
                            " vertices");
    }
    seq.vertices.resize(n, kNoVertex);
    seq.pad_mask.resize(n, 0);
    seq.ring_index.resize(n, -1);
  }
  return seq;
}

VertexId random_start(const HalfEdgeMesh& mesh, VertexId v, Rng& rng) {
  if (!mesh.is_valid_vertex(v)) {
    throw ValidationError("random_start: vertex " + std::to_string(v) + " out of range");
  }
  const auto fan = mesh.fan(v);
  if (fan.empty()) {
    throw ValidationError("random_start: vertex " + std::to_string(v) + " is isolated");
  }
  return fan[rng.uniform_index(fan.size())];
}

}  // namespace spiralnet
