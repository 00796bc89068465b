#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spiralnet/checkpoint.hpp"
#include "spiralnet/features.hpp"
#include "spiralnet/mesh.hpp"
#include "spiralnet/model.hpp"

namespace spiralnet {

/// Per-vertex map from source vertex to target (template) vertex.
/// kNoVertex marks sources without an entry.
using CorrespondenceMap = std::vector<VertexId>;

/// Text file, one `source_idx target_idx` pair per line; '#' lines are
/// skipped. Every source must be < vertex_count and appear at most once.
/// vertex_count 0 sizes the map to the largest source id + 1.
CorrespondenceMap load_correspondences(const std::filesystem::path& path,
                                       std::size_t vertex_count);
void save_correspondences(const CorrespondenceMap& map, const std::filesystem::path& path);

struct TrainingSample {
  std::string name;
  HalfEdgeMesh mesh;
  FeatureMatrix features;
  std::vector<std::int32_t> labels;  // template class per vertex
};

struct TrainConfig {
  NetworkKind kind = NetworkKind::lstm_net;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  AdamConfig adam;
  std::size_t seq_len = 30;
  bool augment = false;
  CenterDistance distance = CenterDistance::euclidean;
  bool normalize = false;
  double dropout = 0.3;
  double forget_bias = 0.0;
  std::size_t classes = 0;  // 0: max training label + 1
  // Width overrides; unset keeps the default stack for `kind`.
  std::optional<std::size_t> embed_width;
  std::optional<std::array<std::size_t, 3>> encoder_widths;
  std::optional<std::size_t> head_width;
};

/// Flat `key=value` file; '#' starts a comment. Known keys:
///   net epochs seed lr beta1 beta2 epsilon seq_len augment distance
///   normalize dropout forget_bias classes embed_width encoder_widths
///   head_width
/// plus dataset keys (train, validation) returned in `extra`.
struct ConfigFile {
  TrainConfig config;
  std::map<std::string, std::string> extra;
  bool has_seed = false;  // the file set `seed`
};
ConfigFile parse_train_config(const std::filesystem::path& path);
ConfigFile parse_train_config_text(const std::string& text, const std::string& source);

/// Network spec implied by a config and the training data dimensions.
NetworkSpec make_network_spec(const TrainConfig& config, std::size_t feature_dim,
                              std::size_t classes);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> validation_loss;
  std::optional<double> validation_accuracy;
};

struct TrainResult {
  Checkpoint best;  // best validation accuracy (ties: lower loss); last epoch without validation
  Checkpoint last;
  std::vector<EpochRecord> history;
};

/// Each epoch visits the training meshes in a seeded shuffled order. Every
/// mesh is one batch: it is serialized with fresh random spiral starts,
/// run forward and backward, followed by one Adam step.
/// Throws ValidationError for an empty dataset or out-of-range labels and
/// NumericError if the loss or a gradient becomes non-finite.
TrainResult train(const std::vector<TrainingSample>& training,
                  const std::vector<TrainingSample>& validation, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Dropout off; spiral starts drawn from `seed`. Throws ValidationError if
/// the feature dimension does not match the checkpoint.
Prediction infer(const Checkpoint& checkpoint, const HalfEdgeMesh& mesh,
                 const FeatureMatrix& features, std::uint64_t seed,
                 bool keep_distribution = false);

/// Serializes a mesh exactly as infer() does for the given seed.
SerializedBatch prepare_batch(const Checkpoint& checkpoint, const HalfEdgeMesh& mesh,
                              const FeatureMatrix& features, std::uint64_t seed);

}  // namespace spiralnet
