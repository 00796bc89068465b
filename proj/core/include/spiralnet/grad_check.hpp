#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spiralnet/adam.hpp"

namespace spiralnet {

struct GradCheckOptions {
  double step = 1e-6;           // central-difference step h
  double tolerance = 1e-6;      // pass threshold on the max relative error
  double denominator_floor = 1e-8;
  std::size_t max_entries_per_block = 0;  // 0 = every entry
  std::uint64_t seed = 0;       // picks entries when sampling
  int order = 2;                // 2: two-point stencil, 4: five-point stencil
};

struct GradCheckBlock {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckBlock> blocks;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Compares analytic gradients against central differences per entry:
///   order 2: (L(w + h) - L(w - h)) / 2h
///   order 4: (-L(w + 2h) + 8 L(w + h) - 8 L(w - h) + L(w - 2h)) / 12h
/// Order 4 suits smooth losses only; use order 2 across ReLU kinks.
/// Relative error is |a - n| / max(|a|, |n|, floor).
/// `loss` must be deterministic. `backward` is called once after the
/// gradient buffers are zeroed and must fill them for the current values.
GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::function<void()>& backward, const ParamList& params,
                           const GradCheckOptions& options = {});

}  // namespace spiralnet
