#pragma once

#include <Eigen/Core>

#include "worstrisk/quadrature.hpp"

namespace worstrisk {

/// Basis-coordinate representation of a covariance kernel over d channels:
/// a (d*N x d*N) symmetric block matrix. The continuum kernel K(s,t) is
/// recovered on demand as the phi-weighted bilinear form of this matrix.
struct CovOperator {
  Eigen::MatrixXd mat;
  int channels = 0;
  int n_basis = 0;

  Eigen::Index dim() const { return mat.rows(); }
};

enum class ChannelSelection { All, Covariates, Target };

/// Symmetry / PSD validation used by the constructors below.
void validate_cov_operator(const CovOperator& op, bool require_psd);

CovOperator make_cov_operator(Eigen::MatrixXd mat, int channels, int n_basis,
                              bool require_psd = true);

/// Uncentered second-moment matrix (1/n) sum s s^t of the selected score blocks.
CovOperator empirical_cov(const ScorePanel& scores, ChannelSelection sel);

/// Continuum kernel value K_{ij}(s, t) reconstructed from the coefficient
/// matrix as the basis-weighted bilinear form.
double kernel_value(const CovOperator& op, const BasisSet& basis, int channel_i, int channel_j,
                    double s, double t);

/// gamma * covA + (1 - gamma) * covO. For gamma > 1 the result may be
/// indefinite, so no PSD check is applied here.
CovOperator pooled_operator(const CovOperator& cov_shifted, const CovOperator& cov_obs,
                            double gamma);

struct EigenSystem {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // orthonormal columns, first nonzero coefficient positive
  int kernel_dim = 0;       // eigenvalues below threshold * max|alpha|
};

/// Full symmetric eigendecomposition with deterministic sign convention.
EigenSystem eigendecompose(const CovOperator& op, double kernel_threshold = 1e-10);
EigenSystem eigendecompose_matrix(const Eigen::MatrixXd& mat, double kernel_threshold = 1e-10);

/// Scores rotated into the eigenbasis: row-wise x V.
Eigen::MatrixXd rotate_scores(const Eigen::MatrixXd& stacked_scores, const EigenSystem& eig);

/// (1/n) Z^t X for aligned realizations.
Eigen::MatrixXd cross_moments(const Eigen::MatrixXd& target_scores,
                              const Eigen::MatrixXd& covariate_scores);

}  // namespace worstrisk
