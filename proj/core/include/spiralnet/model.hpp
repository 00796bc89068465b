#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spiralnet/adam.hpp"
#include "spiralnet/features.hpp"
#include "spiralnet/lstm.hpp"
#include "spiralnet/nn.hpp"

namespace spiralnet {

enum class NetworkKind { lstm_net, fcs_net };

std::string to_string(NetworkKind kind);
/// Accepts "lstm", "lstm-net", "fcs", "fcs-net".
std::optional<NetworkKind> parse_network_kind(std::string_view name);

/// Layer stack of a correspondence network:
///   FC(embed) + 3 encoder layers + FC(head) + FC(classes)
/// where the encoders are LSTM layers (lstm-net) or FCS layers (fcs-net).
/// ReLU follows every layer but the last, which is softmax; dropout follows
/// the embed and head layers.
struct NetworkSpec {
  NetworkKind kind = NetworkKind::lstm_net;
  std::size_t input_dim = 544;
  std::size_t seq_len = 30;
  std::size_t embed_width = 16;
  std::array<std::size_t, 3> encoder_widths{150, 200, 250};
  std::size_t head_width = 256;
  std::size_t classes = 6890;
  double dropout = 0.3;
  double forget_bias = 0.0;

  /// FC16 + LSTM150 + LSTM200 + LSTM250 + FC256 + FC<classes>.
  static NetworkSpec lstm_net(std::size_t input_dim, std::size_t seq_len, std::size_t classes);
  /// FC16 + FCS100 + FCS150 + FCS200 + FC256 + FC<classes>.
  static NetworkSpec fcs_net(std::size_t input_dim, std::size_t seq_len, std::size_t classes);

  /// Throws ValidationError for zero widths, C < 1, p outside [0, 1).
  void validate() const;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

struct LayerParamCount {
  std::string name;  // e.g. "FC16", "LSTM150", "FCS100"
  std::size_t count = 0;
};

/// Closed-form counts per layer, in stack order.
std::vector<LayerParamCount> layer_param_counts(const NetworkSpec& spec);
/// Sum of layer_param_counts.
std::size_t count_params(const NetworkSpec& spec);

/// Per-vertex predictions: argmax target id and, optionally, the full
/// class distribution (V x C).
struct Prediction {
  std::vector<VertexId> targets;
  Tensor distribution;
};

class CorrespondenceModel {
 public:
  CorrespondenceModel() = default;
  /// Allocates zero parameters for `spec`.
  explicit CorrespondenceModel(NetworkSpec spec);

  /// Glorot-uniform weights, zero biases (forget-gate bias per spec).
  static CorrespondenceModel build(const NetworkSpec& spec, Rng& rng);

  const NetworkSpec& spec() const { return spec_; }

  /// Learnable tensors with their gradient buffers, in a fixed order.
  ParamList parameters();
  std::vector<std::pair<std::string, const Tensor*>> named_tensors() const;
  /// Counts the scalars actually allocated.
  std::size_t parameter_count() const;

  /// Class probabilities for every vertex of the batch (V x C).
  /// Eval mode draws no random numbers; `rng` feeds dropout in train mode.
  Tensor forward(const SerializedBatch& batch, Mode mode, Rng& rng) const;
  Tensor predict(const SerializedBatch& batch) const;

  struct StepResult {
    double loss = 0.0;
    double accuracy = 0.0;
  };
  /// Zeroes the gradient buffers, runs forward and backward with
  /// cross-entropy against `labels`, and leaves dL/dparams in the buffers.
  StepResult forward_backward(const SerializedBatch& batch, std::span<const std::int32_t> labels,
                              Mode mode, Rng& rng);

 private:
  struct Trace;
  Tensor run_forward(const SerializedBatch& batch, Mode mode, Rng* rng, Trace* trace) const;
  void check_batch(const SerializedBatch& batch) const;

  NetworkSpec spec_;
  LinearParams embed_, head_, output_;
  std::array<LstmParams, 3> lstm_;
  std::array<LinearParams, 3> fcs_;

  LinearParams embed_grad_, head_grad_, output_grad_;
  std::array<LstmParams, 3> lstm_grad_;
  std::array<LinearParams, 3> fcs_grad_;
};

}  // namespace spiralnet
