#pragma once

#include <Eigen/Core>
#include <vector>

#include "worstrisk/basis.hpp"
#include "worstrisk/grid.hpp"

namespace worstrisk {

/// Left-endpoint Riemann inner product sum f(t_i) g(t_i) (t_{i+1} - t_i).
/// This is the discretization every estimator in the library is built on.
double quad_inner(const TimeGrid& grid, const Eigen::VectorXd& f, const Eigen::VectorXd& g);
double quad_inner(const SampledCurve& f, const SampledCurve& g);

/// <f, phi_k> for every column of a tabulated basis.
Eigen::VectorXd quad_project(const TimeGrid& grid, const Eigen::VectorXd& f,
                             const Eigen::MatrixXd& basis_tab);

/// Basis scores of one realization.
struct ScoreRow {
  Eigen::VectorXd target;     // zeta_k, length N
  Eigen::MatrixXd covariate;  // xi_{j,k}, p x N
};

/// Basis scores of a panel of realizations (target block first).
struct ScorePanel {
  Eigen::MatrixXd target;                   // n x N
  std::vector<Eigen::MatrixXd> covariates;  // p entries, each n x N

  std::size_t rows() const { return static_cast<std::size_t>(target.rows()); }
  int covariate_count() const { return static_cast<int>(covariates.size()); }
  int n_basis() const { return static_cast<int>(target.cols()); }

  /// n x (p*N), covariate blocks in order.
  Eigen::MatrixXd stacked_covariates() const;
  /// n x ((p+1)*N), target block first.
  Eigen::MatrixXd stacked_all() const;

  static ScorePanel from_stacked(const Eigen::MatrixXd& all, int covariates, int n_basis);
  ScorePanel select(const std::vector<std::size_t>& ids) const;
};

ScoreRow project_scores(const CurveSystem& sys, const BasisSet& basis);
ScorePanel project_scores(const CurvePanel& panel, const BasisSet& basis);

}  // namespace worstrisk
