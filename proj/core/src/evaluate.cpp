#include "spiralnet/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <ostream>

#include "spiralnet/error.hpp"
#include "spiralnet/geodesic.hpp"
#include "spiralnet/parallel.hpp"

namespace spiralnet {

namespace {

std::string shortest(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

void check_radii(std::span<const double> radii) {
  if (radii.empty()) throw ValidationError("evaluate: empty radius grid");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!std::isfinite(radii[i]) || radii[i] < 0.0) {
      throw ValidationError("evaluate: radius grid must hold finite non-negative values");
    }
    if (i > 0 && radii[i] <= radii[i - 1]) {
      throw ValidationError("evaluate: radius grid must be strictly ascending");
    }
  }
}

}  // namespace

std::vector<double> radius_grid(double max_radius, double step) {
  if (!(step > 0.0) || !(max_radius >= 0.0) || !std::isfinite(max_radius)) {
    throw ValidationError("radius grid needs step > 0 and a finite max >= 0");
  }
  // Half-step slack absorbs rounding in max / step.
  const auto count = static_cast<std::size_t>(std::floor(max_radius / step + 0.5)) + 1;
  std::vector<double> radii(count);
  for (std::size_t i = 0; i < count; ++i) radii[i] = static_cast<double>(i) * step;
  return radii;
}

std::vector<double> default_radius_grid() { return radius_grid(0.25, 0.0025); }

std::vector<double> correspondence_errors(std::span<const VertexId> predicted,
                                          std::span<const VertexId> ground_truth,
                                          const HalfEdgeMesh& target_mesh) {
  if (predicted.size() != ground_truth.size()) {
    throw ValidationError("evaluate: prediction covers " + std::to_string(predicted.size()) +
                          " vertices, ground truth " + std::to_string(ground_truth.size()));
  }
  // Group sources by true target: one truncated Dijkstra per distinct target.
  std::map<VertexId, std::vector<std::size_t>> by_truth;
  for (std::size_t v = 0; v < ground_truth.size(); ++v) {
    const VertexId g = ground_truth[v];
    const VertexId p = predicted[v];
    if ((g == kNoVertex) != (p == kNoVertex)) {
      throw ValidationError("evaluate: source vertex " + std::to_string(v) +
                            " is covered by only one of prediction and ground truth");
    }
    if (g == kNoVertex) continue;
    if (!target_mesh.is_valid_vertex(g)) {
      throw ValidationError("evaluate: ground-truth label " + std::to_string(g) + " of vertex " +
                            std::to_string(v) + " out of range");
    }
    if (!target_mesh.is_valid_vertex(p)) {
      throw ValidationError("evaluate: predicted label " + std::to_string(p) + " of vertex " +
                            std::to_string(v) + " out of range");
    }
    by_truth[g].push_back(v);
  }

  std::vector<std::pair<VertexId, const std::vector<std::size_t>*>> groups;
  for (const auto& [g, sources] : by_truth) groups.emplace_back(g, &sources);

  const double area = target_mesh.surface_area();
  const double norm = area > 0.0 ? std::sqrt(area) : 1.0;
  std::vector<double> raw(ground_truth.size(), 0.0);
  parallel_for(groups.size(), [&](std::size_t begin, std::size_t end) {
    std::vector<VertexId> targets;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& sources = *groups[i].second;
      targets.clear();
      for (auto v : sources) targets.push_back(predicted[v]);
      const auto d = geodesic_distances_to(target_mesh, groups[i].first, targets);
      for (std::size_t j = 0; j < sources.size(); ++j) raw[sources[j]] = d[j] / norm;
    }
  });

  std::vector<double> errors;
  for (std::size_t v = 0; v < ground_truth.size(); ++v) {
    if (ground_truth[v] != kNoVertex) errors.push_back(raw[v]);
  }
  return errors;
}

GeodesicErrorCurve error_curve(std::span<const double> errors, std::span<const double> radii) {
  check_radii(radii);
  if (errors.empty()) throw ValidationError("evaluate: no vertices to evaluate");
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  GeodesicErrorCurve curve;
  curve.radii.assign(radii.begin(), radii.end());
  curve.evaluated = sorted.size();
  const auto n = static_cast<double>(sorted.size());
  for (double r : radii) {
    const auto within = std::upper_bound(sorted.begin(), sorted.end(), r) - sorted.begin();
    curve.fractions.push_back(static_cast<double>(within) / n);
  }
  for (std::size_t i = 1; i < radii.size(); ++i) {
    curve.auc += 0.5 * (curve.fractions[i] + curve.fractions[i - 1]) * (radii[i] - radii[i - 1]);
  }
  return curve;
}

GeodesicErrorCurve evaluate(std::span<const VertexId> predicted,
                            std::span<const VertexId> ground_truth,
                            const HalfEdgeMesh& target_mesh, std::span<const double> radii) {
  check_radii(radii);
  const auto errors = correspondence_errors(predicted, ground_truth, target_mesh);
  return error_curve(errors, radii);
}

RobustnessSweep robustness_sweep(const Checkpoint& checkpoint, const HalfEdgeMesh& mesh,
                                 const FeatureMatrix& features,
                                 std::span<const VertexId> ground_truth,
                                 const HalfEdgeMesh& target_mesh, std::size_t runs,
                                 std::uint64_t base_seed, std::span<const double> radii) {
  if (runs == 0) throw ValidationError("sweep: runs must be >= 1");
  check_radii(radii);
  RobustnessSweep sweep;
  sweep.radii.assign(radii.begin(), radii.end());
  for (std::size_t r = 0; r < runs; ++r) {
    const Prediction p = infer(checkpoint, mesh, features, derive_seed(base_seed, r));
    sweep.curves.push_back(evaluate(p, ground_truth, target_mesh, radii));
  }
  const std::size_t m = radii.size();
  sweep.mean.assign(m, 0.0);
  sweep.min.assign(m, 1.0);
  sweep.max.assign(m, 0.0);
  for (const auto& c : sweep.curves) {
    for (std::size_t i = 0; i < m; ++i) {
      sweep.mean[i] += c.fractions[i];
      sweep.min[i] = std::min(sweep.min[i], c.fractions[i]);
      sweep.max[i] = std::max(sweep.max[i], c.fractions[i]);
    }
  }
  for (auto& x : sweep.mean) x /= static_cast<double>(runs);
  return sweep;
}

void write_curve_csv(const GeodesicErrorCurve& curve, std::ostream& out) {
  out << "radius,fraction\n";
  for (std::size_t i = 0; i < curve.radii.size(); ++i) {
    out << shortest(curve.radii[i]) << ',' << shortest(curve.fractions[i]) << '\n';
  }
  out << "# auc=" << shortest(curve.auc) << '\n';
}

void write_sweep_csv(const RobustnessSweep& sweep, std::ostream& out) {
  out << "radius,mean,min,max\n";
  for (std::size_t i = 0; i < sweep.radii.size(); ++i) {
    out << shortest(sweep.radii[i]) << ',' << shortest(sweep.mean[i]) << ','
        << shortest(sweep.min[i]) << ',' << shortest(sweep.max[i]) << '\n';
  }
}

}  // namespace spiralnet
