#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "spiralnet/checkpoint.hpp"
#include "spiralnet/features.hpp"
#include "spiralnet/mesh.hpp"
#include "spiralnet/train.hpp"

namespace spiralnet {

/// {0, step, 2*step, ..., max}; radius i is computed as i * step.
std::vector<double> radius_grid(double max_radius, double step);
/// 0 to 0.25 in steps of 0.0025 (101 radii).
std::vector<double> default_radius_grid();

struct GeodesicErrorCurve {
  std::vector<double> radii;
  std::vector<double> fractions;  // fraction of evaluated vertices with error <= radius
  double auc = 0.0;               // trapezoidal, over [radii.front(), radii.back()]
  std::size_t evaluated = 0;
};

/// Normalized geodesic error per evaluated source vertex, in source order.
/// Sources with kNoVertex ground truth are skipped. Throws ValidationError if
/// the maps differ in coverage or a target id is outside target_mesh.
std::vector<double> correspondence_errors(std::span<const VertexId> predicted,
                                          std::span<const VertexId> ground_truth,
                                          const HalfEdgeMesh& target_mesh);

/// Empirical CDF of `errors` sampled on `radii` (ascending, non-empty).
GeodesicErrorCurve error_curve(std::span<const double> errors, std::span<const double> radii);

GeodesicErrorCurve evaluate(std::span<const VertexId> predicted,
                            std::span<const VertexId> ground_truth,
                            const HalfEdgeMesh& target_mesh, std::span<const double> radii);
inline GeodesicErrorCurve evaluate(const Prediction& prediction,
                                   std::span<const VertexId> ground_truth,
                                   const HalfEdgeMesh& target_mesh,
                                   std::span<const double> radii) {
  return evaluate(prediction.targets, ground_truth, target_mesh, radii);
}

struct RobustnessSweep {
  std::vector<GeodesicErrorCurve> curves;  // one per run
  std::vector<double> radii;
  std::vector<double> mean, min, max;      // per radius across runs
};

/// Run r infers with seed derive_seed(base_seed, r) and is scored against
/// ground_truth on target_mesh. Throws ValidationError for runs == 0.
RobustnessSweep robustness_sweep(const Checkpoint& checkpoint, const HalfEdgeMesh& mesh,
                                 const FeatureMatrix& features,
                                 std::span<const VertexId> ground_truth,
                                 const HalfEdgeMesh& target_mesh, std::size_t runs,
                                 std::uint64_t base_seed, std::span<const double> radii);

/// `radius,fraction` rows, then `# auc=<value>`.
void write_curve_csv(const GeodesicErrorCurve& curve, std::ostream& out);
/// `radius,mean,min,max` rows.
void write_sweep_csv(const RobustnessSweep& sweep, std::ostream& out);

}  // namespace spiralnet
