#pragma once

#include <cstdint>

#include "spiralnet/grad_check.hpp"
#include "spiralnet/model.hpp"

namespace spiralnet {

/// Five-point stencil, h = 1e-3, floor 1e-6, tolerance 1e-5.
GradCheckOptions lstm_sequence_check_options();
/// Two-point stencil (ReLU kinks), h = 1e-5, floor 1e-6, tolerance 1e-4.
GradCheckOptions network_check_options();

/// LSTM over a ragged batch (3 rows, 5 steps, prefix masks of length 5, 3
/// and 4) with random weights and biases. The loss is
///   <h_last, R> + <hidden_seq, S>
/// for random R, S, so every step and both outputs of the backward pass are
/// exercised. Checks all gate tensors and the inputs.
GradCheckReport check_lstm_sequence_gradients(
    std::uint64_t seed, const GradCheckOptions& options = lstm_sequence_check_options());

/// A narrow network of `kind` on a 2 x 5 grid strip with random features and
/// labels, metric augmentation on. The loss is eval-mode cross-entropy.
GradCheckReport check_network_gradients(NetworkKind kind, std::uint64_t seed,
                                        const GradCheckOptions& options = network_check_options());

}  // namespace spiralnet
