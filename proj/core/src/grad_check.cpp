#include "spiralnet/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spiralnet/error.hpp"
#include "spiralnet/random.hpp"

namespace spiralnet {

GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::function<void()>& backward, const ParamList& params,
                           const GradCheckOptions& options) {
  if (options.order != 2 && options.order != 4) {
    throw ValidationError("grad_check: order must be 2 or 4");
  }
  zero_grads(params);
  backward();

  GradCheckReport report;
  report.tolerance = options.tolerance;
  Rng rng(options.seed);
  for (const auto& p : params) {
    GradCheckBlock block;
    block.name = p.name;
    std::vector<std::size_t> entries(p.value->size());
    std::iota(entries.begin(), entries.end(), std::size_t{0});
    if (options.max_entries_per_block > 0 && entries.size() > options.max_entries_per_block) {
      rng.shuffle(entries);
      entries.resize(options.max_entries_per_block);
      std::sort(entries.begin(), entries.end());
    }
    for (std::size_t i : entries) {
      double& w = (*p.value)[i];
      const double saved = w;
      auto at = [&](double offset) {
        w = saved + offset;
        const double l = loss();
        w = saved;
        return l;
      };
      const double h = options.step;
      const double numeric =
          options.order == 2
              ? (at(h) - at(-h)) / (2.0 * h)
              : (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h);
      const double analytic = (*p.grad)[i];
      const double abs_err = std::abs(analytic - numeric);
      const double denom =
          std::max({std::abs(analytic), std::abs(numeric), options.denominator_floor});
      block.max_abs_error = std::max(block.max_abs_error, abs_err);
      block.max_rel_error = std::max(block.max_rel_error, abs_err / denom);
      ++block.checked;
    }
    report.max_rel_error = std::max(report.max_rel_error, block.max_rel_error);
    report.blocks.push_back(std::move(block));
  }
  report.passed = report.max_rel_error < options.tolerance;
  return report;
}

}  // namespace spiralnet
