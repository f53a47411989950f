#include "worstrisk/basis.hpp"

#include <cmath>

namespace worstrisk {

BasisSet BasisSet::sine(int n_basis, double t_start, double t_end) {
  if (n_basis < 1) throw DomainError("basis size must be positive");
  if (!(t_end > t_start)) throw DomainError("basis interval must have positive length");
  BasisSet b;
  b.kind_ = Kind::Sine;
  b.n_basis_ = n_basis;
  b.t_start_ = t_start;
  b.t_end_ = t_end;
  return b;
}

BasisSet BasisSet::tabulated(GridPtr grid, Eigen::MatrixXd values) {
  if (!grid) throw GridMismatch("tabulated basis requires a grid");
  if (static_cast<std::size_t>(values.rows()) != grid->size())
    throw DimensionMismatch("tabulated basis rows must match the grid");
  if (values.cols() < 1) throw DomainError("tabulated basis needs at least one function");
  BasisSet b;
  b.kind_ = Kind::Tabulated;
  b.n_basis_ = static_cast<int>(values.cols());
  b.t_start_ = grid->t_start();
  b.t_end_ = grid->t_end();
  b.ref_grid_ = std::move(grid);
  b.ref_values_ = std::move(values);
  return b;
}

double BasisSet::eval(int k, double t) const {
  if (k < 0 || k >= n_basis_) throw DomainError("basis index out of range");
  if (kind_ == Kind::Sine) {
    const double T = t_end_ - t_start_;
    const double u = (t - t_start_) / T;
    return std::sqrt(2.0 / T) * std::sin(2.0 * M_PI * static_cast<double>(k + 1) * u);
  }
  // linear interpolation on the reference grid, clamped at the ends
  const auto& pts = ref_grid_->points();
  if (t <= pts.front()) return ref_values_(0, k);
  if (t >= pts.back()) return ref_values_(static_cast<Eigen::Index>(pts.size()) - 1, k);
  auto it = std::upper_bound(pts.begin(), pts.end(), t);
  const auto hi = static_cast<Eigen::Index>(it - pts.begin());
  const auto lo = hi - 1;
  const double t0 = pts[static_cast<std::size_t>(lo)];
  const double t1 = pts[static_cast<std::size_t>(hi)];
  const double w = (t - t0) / (t1 - t0);
  return (1.0 - w) * ref_values_(lo, k) + w * ref_values_(hi, k);
}

Eigen::MatrixXd BasisSet::tabulate(const TimeGrid& grid) const {
  if (kind_ == Kind::Tabulated && ref_grid_ && ref_grid_->same_as(grid)) return ref_values_;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(grid.size()), n_basis_);
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (int k = 0; k < n_basis_; ++k)
      out(static_cast<Eigen::Index>(i), k) = eval(k, grid[i]);
  return out;
}

double max_gram_deviation(const BasisSet& basis, const TimeGrid& grid) {
  const Eigen::MatrixXd tab = basis.tabulate(grid);
  const Eigen::MatrixXd gram = tab.transpose() * grid.quad_weights().asDiagonal() * tab;
  const Eigen::MatrixXd dev =
      gram - Eigen::MatrixXd::Identity(basis.size(), basis.size());
  return dev.cwiseAbs().maxCoeff();
}

}  // namespace worstrisk
