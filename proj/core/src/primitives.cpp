#include "spiralnet/primitives.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "spiralnet/error.hpp"

namespace spiralnet {

namespace {

// Flip faces whose normal points towards the centroid of the vertex cloud.
void orient_outward(TriangleSoup& soup) {
  Vec3 centroid;
  for (const auto& p : soup.positions) centroid += p;
  centroid = (1.0 / static_cast<double>(soup.positions.size())) * centroid;
  for (auto& f : soup.faces) {
    const Vec3 a = soup.positions[static_cast<std::size_t>(f[0])];
    const Vec3 b = soup.positions[static_cast<std::size_t>(f[1])];
    const Vec3 c = soup.positions[static_cast<std::size_t>(f[2])];
    const Vec3 n = cross(b - a, c - a);
    if (dot(n, (1.0 / 3.0) * (a + b + c) - centroid) < 0.0) std::swap(f[1], f[2]);
  }
}

}  // namespace

TriangleSoup make_tetrahedron() {
  TriangleSoup soup;
  soup.positions = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  soup.faces = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  orient_outward(soup);
  return soup;
}

TriangleSoup make_icosahedron() {
  const double phi = std::numbers::phi;
  const double s = 1.0 / std::sqrt(1.0 + phi * phi);
  TriangleSoup soup;
  soup.positions = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
  };
  for (auto& p : soup.positions) p = s * p;
  soup.faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
  };
  orient_outward(soup);
  return soup;
}

TriangleSoup make_icosphere(std::size_t levels) {
  TriangleSoup soup = make_icosahedron();
  for (std::size_t level = 0; level < levels; ++level) {
    std::map<std::pair<VertexId, VertexId>, VertexId> midpoints;
    auto midpoint = [&](VertexId a, VertexId b) {
      const auto key = std::minmax(a, b);
      const auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      const Vec3 m = 0.5 * (soup.positions[static_cast<std::size_t>(a)] +
                            soup.positions[static_cast<std::size_t>(b)]);
      soup.positions.push_back((1.0 / norm(m)) * m);
      const auto id = static_cast<VertexId>(soup.positions.size() - 1);
      midpoints.emplace(key, id);
      return id;
    };
    std::vector<Triangle> faces;
    faces.reserve(soup.faces.size() * 4);
    for (const auto& f : soup.faces) {
      const VertexId ab = midpoint(f[0], f[1]);
      const VertexId bc = midpoint(f[1], f[2]);
      const VertexId ca = midpoint(f[2], f[0]);
      faces.push_back({f[0], ab, ca});
      faces.push_back({f[1], bc, ab});
      faces.push_back({f[2], ca, bc});
      faces.push_back({ab, bc, ca});
    }
    soup.faces = std::move(faces);
  }
  return soup;
}

TriangleSoup make_grid(std::size_t rows, std::size_t cols, double spacing) {
  if (rows < 2 || cols < 2) throw ValidationError("make_grid: need at least 2x2 vertices");
  TriangleSoup soup;
  soup.positions.reserve(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      soup.positions.push_back(
          {static_cast<double>(j) * spacing, static_cast<double>(i) * spacing, 0.0});
    }
  }
  auto id = [cols](std::size_t i, std::size_t j) { return static_cast<VertexId>(i * cols + j); };
  for (std::size_t i = 0; i + 1 < rows; ++i) {
    for (std::size_t j = 0; j + 1 < cols; ++j) {
      const VertexId a = id(i, j), b = id(i, j + 1), c = id(i + 1, j), d = id(i + 1, j + 1);
      soup.faces.push_back({a, b, d});
      soup.faces.push_back({a, d, c});
    }
  }
  return soup;
}

TriangleSoup make_strip(std::size_t length) { return make_grid(2, length); }

TriangleSoup make_triangle() {
  TriangleSoup soup;
  soup.positions = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  soup.faces = {{0, 1, 2}};
  return soup;
}

}  // namespace spiralnet
