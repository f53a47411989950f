#include "worstrisk/grid.hpp"

#include <cmath>

namespace worstrisk {

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw DomainError("TimeGrid needs at least 2 points");
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    if (!(points_[i] < points_[i + 1]))
      throw DomainError("TimeGrid points must be strictly increasing");
  }
  if (!(span() > 0)) throw DomainError("TimeGrid span must be positive");
  weights_.resize(static_cast<Eigen::Index>(points_.size()));
  for (std::size_t i = 0; i + 1 < points_.size(); ++i)
    weights_[static_cast<Eigen::Index>(i)] = points_[i + 1] - points_[i];
  weights_[static_cast<Eigen::Index>(points_.size()) - 1] = 0.0;
}

TimeGrid TimeGrid::uniform(double t_start, double t_end, std::size_t n_points) {
  if (n_points < 2) throw DomainError("uniform grid needs at least 2 points");
  std::vector<double> pts(n_points);
  const double h = (t_end - t_start) / static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i)
    pts[i] = t_start + h * static_cast<double>(i);
  pts.back() = t_end;
  return TimeGrid(std::move(pts));
}

bool TimeGrid::same_as(const TimeGrid& other) const {
  if (this == &other) return true;
  return points_ == other.points_;
}

bool same_grid(const GridPtr& a, const GridPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->same_as(*b);
}

SampledCurve::SampledCurve(GridPtr g, Eigen::VectorXd v, CurveInterpolation interp)
    : grid(std::move(g)), values(std::move(v)), interpretation(interp) {
  if (!grid) throw GridMismatch("SampledCurve requires a grid");
  if (static_cast<std::size_t>(values.size()) != grid->size())
    throw GridMismatch("SampledCurve values length must equal grid length");
  if (!values.allFinite()) throw DomainError("SampledCurve values must be finite");
}

CurveSystem::CurveSystem(SampledCurve y, std::vector<SampledCurve> x)
    : target(std::move(y)), covariates(std::move(x)) {
  if (covariates.empty()) throw DimensionMismatch("CurveSystem needs p >= 1 covariates");
  for (const auto& c : covariates) {
    if (!same_grid(c.grid, target.grid))
      throw GridMismatch("all curves in a CurveSystem must share one grid");
  }
}

CurvePanel::CurvePanel(GridPtr grid, std::vector<Eigen::MatrixXd> channels, std::string label)
    : grid_(std::move(grid)), channels_(std::move(channels)), label_(std::move(label)) {
  if (!grid_) throw GridMismatch("CurvePanel requires a grid");
  if (channels_.size() < 2) throw DimensionMismatch("CurvePanel needs a target and p >= 1 covariates");
  const auto rows = channels_[0].rows();
  for (const auto& c : channels_) {
    if (c.rows() != rows) throw DimensionMismatch("CurvePanel channels must have equal realization counts");
    if (static_cast<std::size_t>(c.cols()) != grid_->size())
      throw GridMismatch("CurvePanel channel columns must match the grid");
  }
}

CurveSystem CurvePanel::system(std::size_t i) const {
  if (i >= size()) throw DomainError("CurvePanel realization index out of range");
  SampledCurve y(grid_, channels_[0].row(static_cast<Eigen::Index>(i)).transpose());
  std::vector<SampledCurve> xs;
  xs.reserve(channels_.size() - 1);
  for (std::size_t c = 1; c < channels_.size(); ++c)
    xs.emplace_back(grid_, channels_[c].row(static_cast<Eigen::Index>(i)).transpose());
  return CurveSystem(std::move(y), std::move(xs));
}

CurvePanel CurvePanel::with_channel_offset(int c, const Eigen::VectorXd& values) const {
  if (c < 0 || static_cast<std::size_t>(c) >= channels_.size())
    throw DomainError("channel index out of range");
  if (static_cast<std::size_t>(values.size()) != grid_->size())
    throw GridMismatch("offset length must match the grid");
  auto channels = channels_;
  channels[static_cast<std::size_t>(c)].rowwise() += values.transpose();
  return CurvePanel(grid_, std::move(channels), label_);
}

}  // namespace worstrisk
