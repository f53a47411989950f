#include "worstrisk/partition.hpp"

#include <cmath>

namespace worstrisk {

std::vector<double> AdaptivePartition::times() const {
  std::vector<double> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back((*grid)[i]);
  return out;
}

AdaptivePartition adaptive_partition(const GridPtr& grid,
                                     const std::vector<const Eigen::VectorXd*>& channels,
                                     double delta) {
  if (!(delta > 0.0)) throw InvalidThreshold("adaptive_partition requires delta > 0");
  if (!grid) throw GridMismatch("adaptive_partition requires a grid");
  for (const auto* c : channels) {
    if (static_cast<std::size_t>(c->size()) != grid->size())
      throw GridMismatch("adaptive_partition channel must match the grid");
  }
  AdaptivePartition part;
  part.grid = grid;
  part.delta = delta;
  part.indices.push_back(0);
  std::size_t anchor = 0;
  const std::size_t m = grid->size();
  for (std::size_t i = 1; i + 1 < m; ++i) {
    bool moved = false;
    for (const auto* c : channels) {
      if (std::abs((*c)[static_cast<Eigen::Index>(i)] - (*c)[static_cast<Eigen::Index>(anchor)]) >=
          delta) {
        moved = true;
        break;
      }
    }
    if (moved) {
      part.indices.push_back(i);
      anchor = i;
    }
  }
  part.indices.push_back(m - 1);
  return part;
}

namespace {
std::vector<const Eigen::VectorXd*> collect(const CurveSystem& sys, bool with_target) {
  std::vector<const Eigen::VectorXd*> out;
  if (with_target) out.push_back(&sys.target.values);
  for (const auto& c : sys.covariates) out.push_back(&c.values);
  return out;
}
}  // namespace

AdaptivePartition adaptive_partition(const CurveSystem& sys, double delta) {
  return adaptive_partition(sys.grid(), collect(sys, true), delta);
}

AdaptivePartition adaptive_partition(const CurveSystem& a, const CurveSystem& b, double delta) {
  if (!same_grid(a.grid(), b.grid()))
    throw GridMismatch("adaptive_partition systems must share a grid");
  auto chans = collect(a, true);
  auto more = collect(b, true);
  chans.insert(chans.end(), more.begin(), more.end());
  return adaptive_partition(a.grid(), chans, delta);
}

AdaptivePartition adaptive_partition_covariates(const CurveSystem& a, const CurveSystem& b,
                                                double delta) {
  if (!same_grid(a.grid(), b.grid()))
    throw GridMismatch("adaptive_partition systems must share a grid");
  auto chans = collect(a, false);
  auto more = collect(b, false);
  chans.insert(chans.end(), more.begin(), more.end());
  return adaptive_partition(a.grid(), chans, delta);
}

Eigen::VectorXd step_project(const Eigen::VectorXd& values, const AdaptivePartition& part) {
  if (static_cast<std::size_t>(values.size()) != part.grid->size())
    throw GridMismatch("step_project curve must match the partition grid");
  Eigen::VectorXd out(values.size());
  for (std::size_t seg = 0; seg + 1 < part.indices.size(); ++seg) {
    const auto lo = part.indices[seg];
    const auto hi = part.indices[seg + 1];
    const double v = values[static_cast<Eigen::Index>(lo)];
    for (std::size_t i = lo; i < hi; ++i) out[static_cast<Eigen::Index>(i)] = v;
  }
  // t_end is itself a partition point and carries the curve's value there, so
  // the projection stays within delta of every tracked channel at every grid
  // point. The left-endpoint quadrature never reads it.
  const auto last = part.indices.back();
  out[static_cast<Eigen::Index>(last)] = values[static_cast<Eigen::Index>(last)];
  return out;
}

SampledCurve step_project(const SampledCurve& curve, const AdaptivePartition& part) {
  if (!same_grid(curve.grid, part.grid))
    throw GridMismatch("step_project curve must match the partition grid");
  return SampledCurve(curve.grid, step_project(curve.values, part),
                      CurveInterpolation::LeftContinuousStep);
}

}  // namespace worstrisk
