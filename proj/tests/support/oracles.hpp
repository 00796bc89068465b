#pragma once

// Independent reference computations for the test suites. Everything here
// works from the raw face list, never from half-edge connectivity.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "spiralnet/mesh.hpp"
#include "spiralnet/random.hpp"

namespace oracle {

using spiralnet::HalfEdgeMesh;
using spiralnet::TriangleSoup;
using spiralnet::Vec3;
using spiralnet::VertexId;

/// Neighbour sets by scanning every face.
inline std::vector<std::set<VertexId>> adjacency(const std::vector<spiralnet::Triangle>& faces,
                                                 std::size_t vertex_count) {
  std::vector<std::set<VertexId>> adj(vertex_count);
  for (const auto& f : faces) {
    for (int j = 0; j < 3; ++j) {
      adj[static_cast<std::size_t>(f[j])].insert(f[(j + 1) % 3]);
      adj[static_cast<std::size_t>(f[(j + 1) % 3])].insert(f[j]);
    }
  }
  return adj;
}

inline std::vector<std::set<VertexId>> adjacency(const HalfEdgeMesh& mesh) {
  std::vector<spiralnet::Triangle> faces(mesh.faces().begin(), mesh.faces().end());
  return adjacency(faces, mesh.vertex_count());
}

/// Hop distance from v to every vertex; -1 when unreachable.
inline std::vector<int> bfs_depth(const std::vector<std::set<VertexId>>& adj, VertexId v) {
  std::vector<int> depth(adj.size(), -1);
  std::queue<VertexId> q;
  depth[static_cast<std::size_t>(v)] = 0;
  q.push(v);
  while (!q.empty()) {
    const VertexId u = q.front();
    q.pop();
    for (VertexId w : adj[static_cast<std::size_t>(u)]) {
      if (depth[static_cast<std::size_t>(w)] < 0) {
        depth[static_cast<std::size_t>(w)] = depth[static_cast<std::size_t>(u)] + 1;
        q.push(w);
      }
    }
  }
  return depth;
}

/// Vertices within k hops of v.
inline std::set<VertexId> k_disk(const std::vector<std::set<VertexId>>& adj, VertexId v,
                                 int k) {
  const auto depth = bfs_depth(adj, v);
  std::set<VertexId> out;
  for (std::size_t u = 0; u < depth.size(); ++u) {
    if (depth[u] >= 0 && depth[u] <= k) out.insert(static_cast<VertexId>(u));
  }
  return out;
}

/// All-pairs shortest paths over edges weighted by Euclidean length.
inline std::vector<std::vector<double>> floyd_warshall(const HalfEdgeMesh& mesh) {
  const std::size_t n = mesh.vertex_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const auto& f : mesh.faces()) {
    for (int j = 0; j < 3; ++j) {
      const auto a = static_cast<std::size_t>(f[j]);
      const auto b = static_cast<std::size_t>(f[(j + 1) % 3]);
      const double w = spiralnet::distance(mesh.positions()[a], mesh.positions()[b]);
      d[a][b] = std::min(d[a][b], w);
      d[b][a] = std::min(d[b][a], w);
    }
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

/// Sum of triangle areas from the face list.
inline double area(const HalfEdgeMesh& mesh) {
  double a = 0.0;
  for (const auto& f : mesh.faces()) {
    const Vec3 p = mesh.position(f[0]), q = mesh.position(f[1]), r = mesh.position(f[2]);
    a += 0.5 * spiralnet::norm(spiralnet::cross(q - p, r - p));
  }
  return a;
}

struct RigidMotion {
  double r[3][3];
  Vec3 t;
  Vec3 operator()(Vec3 p) const {
    return {r[0][0] * p.x + r[0][1] * p.y + r[0][2] * p.z + t.x,
            r[1][0] * p.x + r[1][1] * p.y + r[1][2] * p.z + t.y,
            r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z + t.z};
  }
};

/// Rotation from a random unit quaternion plus a random translation.
inline RigidMotion random_rigid_motion(spiralnet::Rng& rng) {
  double q[4];
  double n = 0.0;
  for (double& c : q) {
    c = rng.normal();
    n += c * c;
  }
  n = std::sqrt(n);
  for (double& c : q) c /= n;
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  RigidMotion m{{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
                 {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
                 {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}},
                {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)}};
  return m;
}

inline HalfEdgeMesh transformed(const HalfEdgeMesh& mesh, const RigidMotion& m) {
  std::vector<Vec3> p = mesh.positions();
  for (auto& x : p) x = m(x);
  return mesh.with_positions(std::move(p));
}

inline HalfEdgeMesh scaled(const HalfEdgeMesh& mesh, double s) {
  std::vector<Vec3> p = mesh.positions();
  for (auto& x : p) x = s * x;
  return mesh.with_positions(std::move(p));
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    std::ostringstream name;
    name << "spiralnet-" << tag << "-" << ::getpid() << "-" << counter++;
    path_ = std::filesystem::temp_directory_path() / name.str();
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

}  // namespace oracle
