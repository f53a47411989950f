#pragma once

#include <Eigen/Core>
#include <memory>
#include <string>
#include <vector>

#include "worstrisk/errors.hpp"

namespace worstrisk {

/// Sampling grid on a compact interval. Points are strictly increasing and
/// include both endpoints. Immutable after construction.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> points);
  static TimeGrid uniform(double t_start, double t_end, std::size_t n_points);

  double t_start() const { return points_.front(); }
  double t_end() const { return points_.back(); }
  double span() const { return t_end() - t_start(); }
  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  const std::vector<double>& points() const { return points_; }

  /// Left-endpoint quadrature weights: w_i = t_{i+1} - t_i, 0 for the last point.
  const Eigen::VectorXd& quad_weights() const { return weights_; }

  bool same_as(const TimeGrid& other) const;

 private:
  std::vector<double> points_;
  Eigen::VectorXd weights_;
};

using GridPtr = std::shared_ptr<const TimeGrid>;

inline GridPtr make_grid(std::vector<double> points) {
  return std::make_shared<const TimeGrid>(std::move(points));
}
inline GridPtr make_uniform_grid(double t_start, double t_end, std::size_t n) {
  return std::make_shared<const TimeGrid>(TimeGrid::uniform(t_start, t_end, n));
}

bool same_grid(const GridPtr& a, const GridPtr& b);

enum class CurveInterpolation { LeftContinuousStep, Linear };

/// One sampled path on a grid. Values are finite; the curve is immutable.
struct SampledCurve {
  GridPtr grid;
  Eigen::VectorXd values;
  CurveInterpolation interpretation = CurveInterpolation::LeftContinuousStep;

  SampledCurve() = default;
  SampledCurve(GridPtr g, Eigen::VectorXd v,
               CurveInterpolation interp = CurveInterpolation::LeftContinuousStep);
};

/// One realization: target path Y plus p covariate paths X(1..p), all on one grid.
struct CurveSystem {
  SampledCurve target;
  std::vector<SampledCurve> covariates;

  CurveSystem() = default;
  CurveSystem(SampledCurve y, std::vector<SampledCurve> x);

  int covariate_count() const { return static_cast<int>(covariates.size()); }
  const GridPtr& grid() const { return target.grid; }
};

/// A batch of realizations from one environment, stored channel-major:
/// channel 0 is the target, channels 1..p the covariates; each channel
/// is an (n_realizations x n_gridpoints) matrix.
class CurvePanel {
 public:
  CurvePanel(GridPtr grid, std::vector<Eigen::MatrixXd> channels, std::string label);

  std::size_t size() const { return channels_.empty() ? 0 : static_cast<std::size_t>(channels_[0].rows()); }
  int covariate_count() const { return static_cast<int>(channels_.size()) - 1; }
  const GridPtr& grid() const { return grid_; }
  const std::string& label() const { return label_; }

  const Eigen::MatrixXd& channel(int c) const { return channels_.at(static_cast<std::size_t>(c)); }
  const Eigen::MatrixXd& target() const { return channels_.front(); }
  const Eigen::MatrixXd& covariate(int j) const { return channels_.at(static_cast<std::size_t>(j) + 1); }

  CurveSystem system(std::size_t i) const;

  /// Returns a panel with `values` added to every realization of channel `c`.
  CurvePanel with_channel_offset(int c, const Eigen::VectorXd& values) const;

 private:
  GridPtr grid_;
  std::vector<Eigen::MatrixXd> channels_;
  std::string label_;
};

}  // namespace worstrisk
