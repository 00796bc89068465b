#include "spiralnet/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "spiralnet/error.hpp"
#include "spiralnet/geodesic.hpp"
#include "spiralnet/parallel.hpp"

namespace spiralnet {

namespace {

constexpr char kMagic[] = "VFEAT1";

bool is_name_char(char c) { return c != ' ' && c != '\t' && c != '\n' && c != '\r'; }

}  // namespace

FeatureMatrix FeatureMatrix::zeros(std::size_t rows, std::size_t cols, std::string name) {
  return {rows, cols, std::vector<double>(rows * cols, 0.0), std::move(name)};
}

void check_finite(const FeatureMatrix& features) {
  for (std::size_t i = 0; i < features.values.size(); ++i) {
    if (!std::isfinite(features.values[i])) {
      throw NumericError("features '" + features.name + "': non-finite value at row " +
                         std::to_string(i / std::max<std::size_t>(1, features.cols)) +
                         ", column " + std::to_string(i % std::max<std::size_t>(1, features.cols)));
    }
  }
}

FeatureMatrix read_descriptors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string source = path.string();

  std::string magic;
  if (!std::getline(in, magic) || magic != kMagic) {
    throw ParseError(source, 1, "missing VFEAT1 magic");
  }
  std::string header;
  if (!std::getline(in, header)) throw ParseError(source, 2, "missing header line");
  std::istringstream hs(header);
  std::size_t rows = 0, cols = 0;
  std::string name, extra;
  if (!(hs >> rows >> cols >> name) || (hs >> extra)) {
    throw ParseError(source, 2, "header must be '<V> <D> <name>'");
  }
  FeatureMatrix m{rows, cols, std::vector<double>(rows * cols), name};
  in.read(reinterpret_cast<char*>(m.values.data()),
          static_cast<std::streamsize>(m.values.size() * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != m.values.size() * sizeof(double)) {
    throw ParseError(source + ": payload truncated, expected " + std::to_string(rows * cols) +
                     " float64 values");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError(source + ": trailing bytes after payload");
  }
  check_finite(m);
  return m;
}

FeatureMatrix load_descriptors(const std::filesystem::path& path, const HalfEdgeMesh& mesh) {
  FeatureMatrix m = read_descriptors(path);
  if (m.rows != mesh.vertex_count()) {
    throw ValidationError(path.string() + ": vertex-count mismatch, file has " +
                          std::to_string(m.rows) + " rows but mesh has " +
                          std::to_string(mesh.vertex_count()) + " vertices");
  }
  return m;
}

void save_descriptors(const FeatureMatrix& features, const std::filesystem::path& path) {
  if (features.name.empty() || !std::all_of(features.name.begin(), features.name.end(), is_name_char)) {
    throw ValidationError("descriptor name must be non-empty without whitespace");
  }
  if (features.values.size() != features.rows * features.cols) {
    throw ValidationError("descriptor matrix size does not match its shape");
  }
  check_finite(features);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << kMagic << '\n' << features.rows << ' ' << features.cols << ' ' << features.name << '\n';
  out.write(reinterpret_cast<const char*>(features.values.data()),
            static_cast<std::streamsize>(features.values.size() * sizeof(double)));
  if (!out) throw IoError("failed writing " + path.string());
}

FeatureMatrix read_descriptor_table(const std::filesystem::path& path, std::string name) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  FeatureMatrix m;
  m.name = std::move(name);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::string token;
    std::size_t count = 0;
    bool first = true;
    while (ls >> token) {
      if (first && token.front() == '#') break;
      first = false;
      double value = 0.0;
      const auto* end = token.data() + token.size();
      auto [ptr, ec] = std::from_chars(token.data(), end, value);
      if (ec != std::errc() || ptr != end) {
        throw ParseError(path.string(), lineno, "bad number '" + token + "'");
      }
      m.values.push_back(value);
      ++count;
    }
    if (count == 0) continue;
    if (m.rows == 0) m.cols = count;
    if (count != m.cols) {
      throw ParseError(path.string(), lineno,
                       "expected " + std::to_string(m.cols) + " columns, got " +
                           std::to_string(count));
    }
    ++m.rows;
  }
  if (m.rows == 0) throw ParseError(path.string() + ": empty descriptor table");
  check_finite(m);
  return m;
}

std::vector<Vec3> vertex_normals(const HalfEdgeMesh& mesh) {
  std::vector<Vec3> normals(mesh.vertex_count());
  for (const auto& tri : mesh.faces()) {
    const Vec3 a = mesh.position(tri[0]);
    // |cross| is twice the face area, so summing raw cross products weights
    // each face by its area.
    const Vec3 n = cross(mesh.position(tri[1]) - a, mesh.position(tri[2]) - a);
    for (VertexId v : tri) normals[static_cast<std::size_t>(v)] += n;
  }
  for (std::size_t v = 0; v < normals.size(); ++v) {
    const double len = norm(normals[v]);
    if (!(len > 0.0)) {
      throw ValidationError("vertex " + std::to_string(v) +
                            ": zero-area fan, normal is undefined");
    }
    normals[v] = (1.0 / len) * normals[v];
  }
  return normals;
}

FeatureMatrix raw_features(const HalfEdgeMesh& mesh, RawFeatureKind kind) {
  const bool with_pos = kind != RawFeatureKind::normal;
  const bool with_nrm = kind != RawFeatureKind::position;
  const std::size_t cols = (with_pos ? 3 : 0) + (with_nrm ? 3 : 0);
  const char* name = kind == RawFeatureKind::position ? "position"
                     : kind == RawFeatureKind::normal ? "normal"
                                                      : "position+normal";
  FeatureMatrix m = FeatureMatrix::zeros(mesh.vertex_count(), cols, name);
  std::vector<Vec3> normals;
  if (with_nrm) normals = vertex_normals(mesh);
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    auto row = m.row(v);
    std::size_t c = 0;
    if (with_pos) {
      const Vec3 p = mesh.position(static_cast<VertexId>(v));
      row[c++] = p.x;
      row[c++] = p.y;
      row[c++] = p.z;
    }
    if (with_nrm) {
      row[c++] = normals[v].x;
      row[c++] = normals[v].y;
      row[c++] = normals[v].z;
    }
  }
  return m;
}

FeatureMatrix metric_augment(const HalfEdgeMesh& mesh, const SpiralSequence& spiral,
                             const FeatureMatrix& base, CenterDistance distance_kind) {
  if (base.rows != mesh.vertex_count()) {
    throw ValidationError("metric_augment: feature rows (" + std::to_string(base.rows) +
                          ") do not match mesh vertices (" + std::to_string(mesh.vertex_count()) +
                          ")");
  }
  const std::size_t n = spiral.size();
  const std::size_t d = base.cols;
  FeatureMatrix out = FeatureMatrix::zeros(n, d + 2, base.name + "++");
  if (n == 0) return out;

  const VertexId center = spiral.center();
  const Vec3 a = mesh.position(center);

  std::vector<double> center_dist(n, 0.0);
  if (distance_kind == CenterDistance::geodesic) {
    std::vector<VertexId> targets;
    for (std::size_t t = 0; t < n; ++t) {
      if (spiral.pad_mask[t]) targets.push_back(spiral.vertices[t]);
    }
    const auto dist = geodesic_distances_to(mesh, center, targets);
    std::size_t k = 0;
    for (std::size_t t = 0; t < n; ++t) {
      if (spiral.pad_mask[t]) center_dist[t] = dist[k++];
    }
  }

  // Previous vertex of the first ring step: the last vertex of the ordered
  // one-ring from the same start.
  VertexId ring_tail = kNoVertex;
  if (spiral.start_neighbor != kNoVertex) {
    ring_tail = ordered_one_ring(mesh, center, spiral.start_neighbor).back();
  }

  for (std::size_t t = 0; t < n; ++t) {
    auto row = out.row(t);
    if (!spiral.pad_mask[t]) continue;
    const VertexId cv = spiral.vertices[t];
    const auto src = base.row(static_cast<std::size_t>(cv));
    std::copy(src.begin(), src.end(), row.begin());
    if (t == 0) continue;

    const VertexId bv = t == 1 ? ring_tail : spiral.vertices[t - 1];
    const Vec3 c = mesh.position(cv);
    const Vec3 b = mesh.position(bv);
    const Vec3 ac = c - a;
    const Vec3 ab = b - a;
    auto pair_name = [&] {
      return "vertices " + std::to_string(bv) + " and " + std::to_string(cv) + " around center " +
             std::to_string(center);
    };
    if (norm(ac) == 0.0 || norm(ab) == 0.0 || (bv != cv && b == c)) {
      throw ValidationError("metric_augment: coincident positions make the angle undefined for " +
                            pair_name());
    }
    row[d] = distance_kind == CenterDistance::euclidean ? norm(ac) : center_dist[t];
    row[d + 1] = bv == cv ? 0.0 : angle_between(ab, ac);
  }
  return out;
}

NormalizationStats NormalizationStats::compute(std::span<const FeatureMatrix* const> matrices) {
  NormalizationStats stats;
  if (matrices.empty()) return stats;
  const std::size_t d = matrices.front()->cols;
  std::vector<double> sum(d, 0.0), sq(d, 0.0);
  std::size_t count = 0;
  for (const FeatureMatrix* m : matrices) {
    if (m->cols != d) throw ValidationError("normalization: feature dimensions differ");
    for (std::size_t r = 0; r < m->rows; ++r) {
      const auto row = m->row(r);
      for (std::size_t c = 0; c < d; ++c) sum[c] += row[c];
    }
    count += m->rows;
  }
  if (count == 0) throw ValidationError("normalization: no rows");
  stats.mean.resize(d);
  for (std::size_t c = 0; c < d; ++c) stats.mean[c] = sum[c] / static_cast<double>(count);
  for (const FeatureMatrix* m : matrices) {
    for (std::size_t r = 0; r < m->rows; ++r) {
      const auto row = m->row(r);
      for (std::size_t c = 0; c < d; ++c) {
        const double dev = row[c] - stats.mean[c];
        sq[c] += dev * dev;
      }
    }
  }
  stats.stddev.resize(d);
  for (std::size_t c = 0; c < d; ++c) {
    const double s = std::sqrt(sq[c] / static_cast<double>(count));
    stats.stddev[c] = s > 0.0 ? s : 1.0;
  }
  return stats;
}

FeatureMatrix NormalizationStats::apply(const FeatureMatrix& features) const {
  if (empty()) return features;
  if (features.cols != mean.size()) {
    throw ValidationError("normalization: expected " + std::to_string(mean.size()) +
                          " feature columns, got " + std::to_string(features.cols));
  }
  FeatureMatrix out = features;
  for (std::size_t r = 0; r < out.rows; ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < out.cols; ++c) row[c] = (row[c] - mean[c]) / stddev[c];
  }
  return out;
}

SerializedBatch serialize_batch(const HalfEdgeMesh& mesh, const FeatureMatrix& features,
                                const SerializeOptions& options, Rng& rng) {
  if (features.rows != mesh.vertex_count()) {
    throw ValidationError("serialize_batch: feature rows (" + std::to_string(features.rows) +
                          ") do not match mesh vertices (" + std::to_string(mesh.vertex_count()) +
                          ")");
  }
  if (options.seq_len == 0) throw ValidationError("serialize_batch: sequence length must be >= 1");

  SerializedBatch batch;
  batch.vertices = mesh.vertex_count();
  batch.steps = options.seq_len;
  batch.dim = features.cols + (options.augment ? 2 : 0);
  batch.augmented = options.augment;
  batch.inputs.assign(batch.vertices * batch.steps * batch.dim, 0.0);
  batch.mask.assign(batch.vertices * batch.steps, 0);
  batch.spirals.assign(batch.vertices * batch.steps, kNoVertex);

  const std::uint64_t batch_seed = rng.next_u64();
  parallel_for(batch.vertices, [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) {
      const auto vid = static_cast<VertexId>(v);
      Rng local(derive_seed(batch_seed, v));
      const VertexId start = random_start(mesh, vid, local);
      const SpiralSequence spiral = spiral_fixed(mesh, vid, batch.steps, start);
      double* dst = batch.inputs.data() + v * batch.steps * batch.dim;
      if (options.augment) {
        const FeatureMatrix rows = metric_augment(mesh, spiral, features, options.distance);
        std::copy(rows.values.begin(), rows.values.end(), dst);
      } else {
        for (std::size_t t = 0; t < batch.steps; ++t) {
          if (!spiral.pad_mask[t]) continue;
          const auto src = features.row(static_cast<std::size_t>(spiral.vertices[t]));
          std::copy(src.begin(), src.end(), dst + t * batch.dim);
        }
      }
      for (std::size_t t = 0; t < batch.steps; ++t) {
        batch.mask[v * batch.steps + t] = spiral.pad_mask[t];
        batch.spirals[v * batch.steps + t] = spiral.vertices[t];
      }
    }
  });
  return batch;
}

}  // namespace spiralnet
