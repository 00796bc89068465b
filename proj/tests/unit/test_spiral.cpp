#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "spiralnet/error.hpp"
#include "spiralnet/primitives.hpp"
#include "spiralnet/spiral.hpp"

using namespace spiralnet;

namespace {

std::vector<std::pair<const char*, HalfEdgeMesh>> fixtures() {
  return {{"tetrahedron", HalfEdgeMesh::build(make_tetrahedron())},
          {"icosahedron", HalfEdgeMesh::build(make_icosahedron())},
          {"grid", HalfEdgeMesh::build(make_grid(12, 12))},
          {"strip", HalfEdgeMesh::build(make_strip(9))}};
}

}  // namespace

TEST_CASE("ring decomposition equals BFS layers") {
  for (const auto& [name, mesh] : fixtures()) {
    CAPTURE(name);
    const auto adj = oracle::adjacency(mesh);
    for (VertexId v = 0; v < static_cast<VertexId>(mesh.vertex_count()); ++v) {
      const auto depth = oracle::bfs_depth(adj, v);
      const auto rings = ring_decompose(mesh, v, 3);
      REQUIRE(rings.rings.size() >= 1);
      CHECK(rings.rings[0] == std::vector<VertexId>{v});
      for (std::size_t r = 0; r < rings.rings.size(); ++r) {
        std::set<VertexId> expect;
        for (std::size_t u = 0; u < depth.size(); ++u) {
          if (depth[u] == static_cast<int>(r)) expect.insert(static_cast<VertexId>(u));
        }
        const auto& ring = rings.rings[r];
        CHECK(std::set<VertexId>(ring.begin(), ring.end()) == expect);
        CHECK(std::set<VertexId>(ring.begin(), ring.end()).size() == ring.size());
      }
    }
  }
}

TEST_CASE("by-ring spirals cover the k-disk with non-decreasing ring index") {
  for (const auto& [name, mesh] : fixtures()) {
    CAPTURE(name);
    const auto adj = oracle::adjacency(mesh);
    for (int k = 1; k <= 3; ++k) {
      for (VertexId v = 0; v < static_cast<VertexId>(mesh.vertex_count()); ++v) {
        const auto s = spiral_by_ring(mesh, v, static_cast<std::size_t>(k), mesh.fan(v)[0]);
        CHECK(s.center() == v);
        CHECK(std::set<VertexId>(s.vertices.begin(), s.vertices.end()) ==
              oracle::k_disk(adj, v, k));
        CHECK(std::is_sorted(s.ring_index.begin(), s.ring_index.end()));
        const auto depth = oracle::bfs_depth(adj, v);
        for (std::size_t i = 0; i < s.size(); ++i) {
          CHECK(s.ring_index[i] == depth[static_cast<std::size_t>(s.vertices[i])]);
        }
        CHECK(s.vertices[1] == mesh.fan(v)[0]);
      }
    }
  }
}

TEST_CASE("changing the start rotates the 1-ring") {
  for (const auto& [name, mesh] : fixtures()) {
    CAPTURE(name);
    for (VertexId v = 0; v < static_cast<VertexId>(mesh.vertex_count()); ++v) {
      if (mesh.is_boundary_vertex(v)) continue;
      const auto fan = mesh.fan(v);
      const auto base = spiral_by_ring(mesh, v, 1, fan[0]);
      for (std::size_t s = 0; s < fan.size(); ++s) {
        const auto rot = spiral_by_ring(mesh, v, 1, fan[s]);
        REQUIRE(rot.size() == base.size());
        for (std::size_t i = 0; i < fan.size(); ++i) {
          CHECK(rot.vertices[1 + i] == base.vertices[1 + (s + i) % fan.size()]);
        }
      }
    }
  }
}

TEST_CASE("deeper rings start next to the ring-1 start on the grid") {
  // Interior grid vertex: the second ring is a closed loop of 12 vertices
  // and each consecutive pair is adjacent or shares a common inner neighbour.
  const auto grid = HalfEdgeMesh::build(make_grid(9, 9));
  const VertexId v = 4 * 9 + 4;
  const auto rings = ring_decompose(grid, v, 2, grid.fan(v)[2]);
  REQUIRE(rings.rings[2].size() == 12);
  const auto& r2 = rings.rings[2];
  // The first outer vertex touches the ring-1 start.
  CHECK(grid.adjacent(r2.front(), rings.rings[1].front()));
  for (std::size_t i = 0; i + 1 < r2.size(); ++i) {
    bool close = grid.adjacent(r2[i], r2[i + 1]);
    for (VertexId w : rings.rings[1]) close = close || (grid.adjacent(w, r2[i]) && grid.adjacent(w, r2[i + 1]));
    CHECK(close);
  }
}

TEST_CASE("spiral_fixed is the prefix of the smallest covering by-ring spiral") {
  const auto grid = HalfEdgeMesh::build(make_grid(15, 15));
  for (std::size_t n : {1u, 7u, 15u, 20u, 30u}) {
    for (VertexId v = 0; v < static_cast<VertexId>(grid.vertex_count()); ++v) {
      const VertexId start = grid.fan(v)[0];
      const auto fixed = spiral_fixed(grid, v, n, start);
      REQUIRE(fixed.size() == n);
      CHECK(fixed.real_count() == n);
      std::size_t k = 1;
      SpiralSequence ring = spiral_by_ring(grid, v, k, start);
      while (ring.size() < n) ring = spiral_by_ring(grid, v, ++k, start);
      CHECK(std::equal(fixed.vertices.begin(), fixed.vertices.end(), ring.vertices.begin()));
    }
  }
}

TEST_CASE("short spirals are padded or rejected") {
  const auto tet = HalfEdgeMesh::build(make_tetrahedron());
  const auto s = spiral_fixed(tet, 0, 10, tet.fan(0)[0]);
  CHECK(s.size() == 10);
  CHECK(s.real_count() == 4);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(s.pad_mask[i] == (i < 4 ? 1 : 0));
    if (i >= 4) {
      CHECK(s.vertices[i] == kNoVertex);
      CHECK(s.ring_index[i] == -1);
    }
  }
  CHECK_THROWS_AS(spiral_fixed(tet, 0, 10, tet.fan(0)[0], PadPolicy::fail), ValidationError);
  CHECK_NOTHROW(spiral_fixed(tet, 0, 4, tet.fan(0)[0], PadPolicy::fail));
}

TEST_CASE("start must be a neighbour; isolated vertices give a single entry") {
  const auto ico = HalfEdgeMesh::build(make_icosahedron());
  CHECK_THROWS_AS(spiral_by_ring(ico, 0, 1, 0), ValidationError);
  VertexId far = kNoVertex;
  for (VertexId u = 1; u < 12; ++u) {
    if (!ico.adjacent(0, u)) far = u;
  }
  CHECK_THROWS_AS(spiral_fixed(ico, 0, 5, far), ValidationError);
  CHECK_THROWS_AS(spiral_by_ring(ico, 0, 1, kNoVertex), ValidationError);

  TriangleSoup soup = make_triangle();
  soup.positions.push_back({5, 5, 5});
  const auto mesh = HalfEdgeMesh::build(soup);
  const auto s = spiral_fixed(mesh, 3, 4, kNoVertex);
  CHECK(s.vertices == std::vector<VertexId>{3, kNoVertex, kNoVertex, kNoVertex});
  Rng rng(1);
  CHECK_THROWS_AS(random_start(mesh, 3, rng), ValidationError);
}

TEST_CASE("random_start is uniform over the one-ring") {
  const auto grid = HalfEdgeMesh::build(make_grid(5, 5));
  const VertexId v = 12;
  REQUIRE(grid.valence(v) == 6);
  Rng rng(42);
  constexpr int kDraws = 60000;
  std::map<VertexId, int> counts;
  for (int i = 0; i < kDraws; ++i) ++counts[random_start(grid, v, rng)];
  CHECK(counts.size() == 6);
  const double p = 1.0 / 6.0;
  const double sigma = std::sqrt(kDraws * p * (1 - p));
  for (const auto& [u, c] : counts) {
    CHECK(grid.adjacent(u, v));
    CHECK(std::abs(c - kDraws * p) < 3 * sigma);
  }
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) CHECK(random_start(grid, v, a) == random_start(grid, v, b));
}
