#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "spiralnet/mesh.hpp"
#include "spiralnet/random.hpp"
#include "spiralnet/spiral.hpp"

namespace spiralnet {

/// Row-major V x D per-vertex descriptors.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::string name;

  static FeatureMatrix zeros(std::size_t rows, std::size_t cols, std::string name = "zeros");

  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
  std::span<double> row(std::size_t r) { return {values.data() + r * cols, cols}; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Throws NumericError naming the first NaN/Inf entry.
void check_finite(const FeatureMatrix& features);

// VFEAT1 descriptor files:
//   "VFEAT1\n" "<V> <D> <name>\n" then V*D little-endian float64, row-major.

/// Reads a VFEAT1 file without reference to any mesh.
FeatureMatrix read_descriptors(const std::filesystem::path& path);

/// read_descriptors plus a vertex-count check against the mesh.
FeatureMatrix load_descriptors(const std::filesystem::path& path, const HalfEdgeMesh& mesh);

void save_descriptors(const FeatureMatrix& features, const std::filesystem::path& path);

/// Text table, one row per vertex, values separated by whitespace or commas.
/// Blank lines and lines starting with '#' are skipped.
FeatureMatrix read_descriptor_table(const std::filesystem::path& path, std::string name);

enum class RawFeatureKind { position, normal, position_normal };

/// Area-weighted unit vertex normals. Throws ValidationError naming the
/// first vertex whose incident faces have zero total area.
std::vector<Vec3> vertex_normals(const HalfEdgeMesh& mesh);

/// Built-in features for runs without external descriptors: positions
/// (D=3), normals (D=3) or both (D=6).
FeatureMatrix raw_features(const HalfEdgeMesh& mesh, RawFeatureKind kind);

/// How the center distance of the metric augmentation is measured.
enum class CenterDistance {
  euclidean,  // straight-line distance in R^3 (default)
  geodesic,   // shortest path along mesh edges
};

/// Base feature rows gathered along the spiral with two extra columns per
/// step: distance from the center a to the step vertex c, and the angle at
/// a between the previous step vertex b and c (radians, [0, pi]). The
/// center step and padded steps get (0, 0). For the first ring step, b is
/// the last vertex of the center's ordered one-ring, so the 1-ring angles
/// form a closed cycle. Returns an N x (D+2) matrix.
/// Throws ValidationError when coincident positions leave the angle undefined.
FeatureMatrix metric_augment(const HalfEdgeMesh& mesh, const SpiralSequence& spiral,
                             const FeatureMatrix& base,
                             CenterDistance distance = CenterDistance::euclidean);

/// Per-dimension z-score statistics. Identity by default (never applied
/// unless requested).
struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> stddev;

  bool empty() const { return mean.empty(); }
  /// Population statistics over all rows of all matrices. Dimensions with
  /// zero spread get stddev 1.
  static NormalizationStats compute(std::span<const FeatureMatrix* const> matrices);
  FeatureMatrix apply(const FeatureMatrix& features) const;
};

/// Model input for one mesh: every vertex's spiral with gathered features.
struct SerializedBatch {
  std::size_t vertices = 0;
  std::size_t steps = 0;  // N
  std::size_t dim = 0;    // D, or D+2 when augmented
  bool augmented = false;
  std::vector<double> inputs;          // vertices x steps x dim
  std::vector<std::uint8_t> mask;      // vertices x steps, 1 = real
  std::vector<VertexId> spirals;       // vertices x steps, kNoVertex = pad

  std::span<const double> step(std::size_t v, std::size_t t) const {
    return {inputs.data() + (v * steps + t) * dim, dim};
  }
  VertexId spiral_at(std::size_t v, std::size_t t) const { return spirals[v * steps + t]; }
  bool real(std::size_t v, std::size_t t) const { return mask[v * steps + t] != 0; }
};

struct SerializeOptions {
  std::size_t seq_len = 1;
  bool augment = false;
  CenterDistance distance = CenterDistance::euclidean;
};

/// Draws one batch seed from `rng`; vertex v then uses
/// Rng(derive_seed(batch_seed, v)) for its random spiral start, so the
/// result does not depend on the worker count.
SerializedBatch serialize_batch(const HalfEdgeMesh& mesh, const FeatureMatrix& features,
                                const SerializeOptions& options, Rng& rng);

}  // namespace spiralnet
