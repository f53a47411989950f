#include "worstrisk/quadrature.hpp"

namespace worstrisk {

double quad_inner(const TimeGrid& grid, const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
  if (static_cast<std::size_t>(f.size()) != grid.size() ||
      static_cast<std::size_t>(g.size()) != grid.size())
    throw GridMismatch("quad_inner operands must match the grid");
  return f.cwiseProduct(g).dot(grid.quad_weights());
}

double quad_inner(const SampledCurve& f, const SampledCurve& g) {
  if (!same_grid(f.grid, g.grid)) throw GridMismatch("quad_inner requires a shared grid");
  return quad_inner(*f.grid, f.values, g.values);
}

Eigen::VectorXd quad_project(const TimeGrid& grid, const Eigen::VectorXd& f,
                             const Eigen::MatrixXd& basis_tab) {
  if (static_cast<std::size_t>(f.size()) != grid.size() ||
      static_cast<std::size_t>(basis_tab.rows()) != grid.size())
    throw GridMismatch("quad_project operands must match the grid");
  return basis_tab.transpose() * grid.quad_weights().cwiseProduct(f);
}

Eigen::MatrixXd ScorePanel::stacked_covariates() const {
  const auto n = target.rows();
  const auto N = target.cols();
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(covariates.size()) * N);
  for (std::size_t j = 0; j < covariates.size(); ++j)
    out.middleCols(static_cast<Eigen::Index>(j) * N, N) = covariates[j];
  return out;
}

Eigen::MatrixXd ScorePanel::stacked_all() const {
  const auto n = target.rows();
  const auto N = target.cols();
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(covariates.size() + 1) * N);
  out.leftCols(N) = target;
  for (std::size_t j = 0; j < covariates.size(); ++j)
    out.middleCols(static_cast<Eigen::Index>(j + 1) * N, N) = covariates[j];
  return out;
}

ScorePanel ScorePanel::from_stacked(const Eigen::MatrixXd& all, int covariates, int n_basis) {
  if (all.cols() != static_cast<Eigen::Index>(covariates + 1) * n_basis)
    throw DimensionMismatch("stacked score width must be (p+1)*N");
  ScorePanel out;
  out.target = all.leftCols(n_basis);
  out.covariates.reserve(static_cast<std::size_t>(covariates));
  for (int j = 0; j < covariates; ++j)
    out.covariates.push_back(all.middleCols(static_cast<Eigen::Index>(j + 1) * n_basis, n_basis));
  return out;
}

ScorePanel ScorePanel::select(const std::vector<std::size_t>& ids) const {
  ScorePanel out;
  const auto N = target.cols();
  out.target.resize(static_cast<Eigen::Index>(ids.size()), N);
  out.covariates.assign(covariates.size(),
                        Eigen::MatrixXd(static_cast<Eigen::Index>(ids.size()), N));
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= rows()) throw DomainError("score selection index out of range");
    out.target.row(static_cast<Eigen::Index>(r)) = target.row(static_cast<Eigen::Index>(ids[r]));
    for (std::size_t j = 0; j < covariates.size(); ++j)
      out.covariates[j].row(static_cast<Eigen::Index>(r)) =
          covariates[j].row(static_cast<Eigen::Index>(ids[r]));
  }
  return out;
}

ScoreRow project_scores(const CurveSystem& sys, const BasisSet& basis) {
  const TimeGrid& grid = *sys.grid();
  const Eigen::MatrixXd tab = basis.tabulate(grid);
  ScoreRow row;
  row.target = quad_project(grid, sys.target.values, tab);
  row.covariate.resize(sys.covariate_count(), basis.size());
  for (int j = 0; j < sys.covariate_count(); ++j)
    row.covariate.row(j) =
        quad_project(grid, sys.covariates[static_cast<std::size_t>(j)].values, tab).transpose();
  return row;
}

ScorePanel project_scores(const CurvePanel& panel, const BasisSet& basis) {
  const TimeGrid& grid = *panel.grid();
  const Eigen::MatrixXd tab = basis.tabulate(grid);
  const Eigen::MatrixXd weighted = grid.quad_weights().asDiagonal() * tab;  // m x N
  ScorePanel out;
  out.target = panel.target() * weighted;
  out.covariates.reserve(static_cast<std::size_t>(panel.covariate_count()));
  for (int j = 0; j < panel.covariate_count(); ++j)
    out.covariates.push_back(panel.covariate(j) * weighted);
  return out;
}

}  // namespace worstrisk
