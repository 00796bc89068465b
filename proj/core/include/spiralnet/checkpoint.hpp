#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "spiralnet/adam.hpp"
#include "spiralnet/features.hpp"
#include "spiralnet/model.hpp"

namespace spiralnet {

inline constexpr int kCheckpointVersion = 1;

struct TrainingMetadata {
  std::uint64_t seed = 0;
  std::size_t epoch = 0;  // epoch the weights were taken from (1-based)
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double validation_accuracy = 0.0;
};

/// Everything needed to resume training or run inference.
struct Checkpoint {
  CorrespondenceModel model;
  AdamState adam;
  NormalizationStats normalization;
  bool augment = false;
  CenterDistance distance = CenterDistance::euclidean;
  TrainingMetadata meta;

  /// Options to serialize a mesh for this model.
  SerializeOptions serialize_options() const {
    return {model.spec().seq_len, augment, distance};
  }
};

/// Text manifest followed by a little-endian float64 payload:
///
///   spiralnet-checkpoint 1
///   <key> <value>                  (spec, options, metadata; reals as hex floats)
///   tensor <name> <rank> <dims...> <offset>
///   payload <count>
///   <count * 8 bytes>
///
/// Tensor offsets count doubles from the start of the payload. Besides the
/// model weights the payload holds the Adam moments ("adam.m.<name>",
/// "adam.v.<name>") and normalization statistics ("norm.mean", "norm.std").
void write_checkpoint(const Checkpoint& checkpoint, std::ostream& out);
Checkpoint read_checkpoint(std::istream& in, const std::string& source = "<stream>");

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace spiralnet
