#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "worstrisk/grid.hpp"

namespace worstrisk {

/// Stopping-time partition of the sample grid: a new point is emitted at the
/// first grid time where any tracked channel has moved by at least delta since
/// the previous partition point. Times always lie on the sample grid.
struct AdaptivePartition {
  GridPtr grid;
  std::vector<std::size_t> indices;  // ascending, first = 0, last = grid size - 1
  double delta = 0.0;

  std::vector<double> times() const;
};

AdaptivePartition adaptive_partition(const GridPtr& grid,
                                     const std::vector<const Eigen::VectorXd*>& channels,
                                     double delta);
AdaptivePartition adaptive_partition(const CurveSystem& sys, double delta);
AdaptivePartition adaptive_partition(const CurveSystem& a, const CurveSystem& b, double delta);
/// Covariate-only variant (the primed stopping times used for denominator scores).
AdaptivePartition adaptive_partition_covariates(const CurveSystem& a, const CurveSystem& b,
                                                double delta);

/// Piecewise-constant projection: on [tau_i, tau_{i+1}) the curve takes its
/// value at tau_i. The final grid point keeps the last partition value.
SampledCurve step_project(const SampledCurve& curve, const AdaptivePartition& part);
Eigen::VectorXd step_project(const Eigen::VectorXd& values, const AdaptivePartition& part);

}  // namespace worstrisk
