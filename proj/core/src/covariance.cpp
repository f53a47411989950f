#include "worstrisk/covariance.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numeric>

namespace worstrisk {

void validate_cov_operator(const CovOperator& op, bool require_psd) {
  const double scale = std::max(1.0, op.mat.cwiseAbs().maxCoeff());
  if ((op.mat - op.mat.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw NotSymmetric("covariance operator must be symmetric");
  if (require_psd) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.mat, Eigen::EigenvaluesOnly);
    const double spectral = es.eigenvalues().cwiseAbs().maxCoeff();
    if (es.eigenvalues().minCoeff() < -1e-8 * std::max(spectral, 1e-300))
      throw DomainError("covariance operator must be positive semidefinite");
  }
}

CovOperator make_cov_operator(Eigen::MatrixXd mat, int channels, int n_basis, bool require_psd) {
  if (mat.rows() != mat.cols() ||
      mat.rows() != static_cast<Eigen::Index>(channels) * n_basis)
    throw DimensionMismatch("covariance operator must be (d*N) x (d*N)");
  CovOperator op{std::move(mat), channels, n_basis};
  validate_cov_operator(op, require_psd);
  return op;
}

CovOperator empirical_cov(const ScorePanel& scores, ChannelSelection sel) {
  if (scores.rows() == 0) throw EmptyPanel("empirical_cov needs at least one realization");
  Eigen::MatrixXd rows;
  int channels = 0;
  switch (sel) {
    case ChannelSelection::All:
      rows = scores.stacked_all();
      channels = scores.covariate_count() + 1;
      break;
    case ChannelSelection::Covariates:
      rows = scores.stacked_covariates();
      channels = scores.covariate_count();
      break;
    case ChannelSelection::Target:
      rows = scores.target;
      channels = 1;
      break;
  }
  Eigen::MatrixXd m = rows.transpose() * rows / static_cast<double>(rows.rows());
  m = 0.5 * (m + m.transpose());  // kill accumulation asymmetry
  return make_cov_operator(std::move(m), channels, scores.n_basis(), true);
}

double kernel_value(const CovOperator& op, const BasisSet& basis, int channel_i, int channel_j,
                    double s, double t) {
  if (channel_i < 0 || channel_i >= op.channels || channel_j < 0 || channel_j >= op.channels)
    throw DomainError("kernel channel index out of range");
  if (basis.size() != op.n_basis)
    throw DimensionMismatch("basis size must match the operator coordinates");
  Eigen::VectorXd ps(op.n_basis), pt(op.n_basis);
  for (int k = 0; k < op.n_basis; ++k) {
    ps[k] = basis.eval(k, s);
    pt[k] = basis.eval(k, t);
  }
  const auto block = op.mat.block(static_cast<Eigen::Index>(channel_i) * op.n_basis,
                                  static_cast<Eigen::Index>(channel_j) * op.n_basis,
                                  op.n_basis, op.n_basis);
  return ps.dot(block * pt);
}

CovOperator pooled_operator(const CovOperator& cov_shifted, const CovOperator& cov_obs,
                            double gamma) {
  if (gamma < 0.0) throw InvalidGamma("pooled_operator requires gamma >= 0");
  if (cov_shifted.dim() != cov_obs.dim() || cov_shifted.channels != cov_obs.channels)
    throw DimensionMismatch("pooled_operator operands must have matching shapes");
  CovOperator out{gamma * cov_shifted.mat + (1.0 - gamma) * cov_obs.mat, cov_shifted.channels,
                  cov_shifted.n_basis};
  validate_cov_operator(out, false);
  return out;
}

EigenSystem eigendecompose_matrix(const Eigen::MatrixXd& mat, double kernel_threshold) {
  const double scale = std::max(1.0, mat.cwiseAbs().maxCoeff());
  if ((mat - mat.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw NotSymmetric("eigendecompose requires a symmetric input");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat);
  if (es.info() != Eigen::Success) throw Error("eigendecomposition failed");
  const auto d = mat.rows();
  // SelfAdjointEigenSolver returns ascending eigenvalues; flip to descending.
  EigenSystem out;
  out.values.resize(d);
  out.vectors.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    out.values[i] = es.eigenvalues()[d - 1 - i];
    out.vectors.col(i) = es.eigenvectors().col(d - 1 - i);
  }
  // sign convention: first coefficient of nonnegligible magnitude is positive
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) {
      const double v = out.vectors(r, c);
      if (std::abs(v) > 1e-12) {
        if (v < 0.0) out.vectors.col(c) = -out.vectors.col(c);
        break;
      }
    }
  }
  const double max_abs = out.values.cwiseAbs().maxCoeff();
  out.kernel_dim = 0;
  for (Eigen::Index i = 0; i < d; ++i)
    if (std::abs(out.values[i]) < kernel_threshold * max_abs) ++out.kernel_dim;
  if (max_abs == 0.0) out.kernel_dim = static_cast<int>(d);
  return out;
}

EigenSystem eigendecompose(const CovOperator& op, double kernel_threshold) {
  return eigendecompose_matrix(op.mat, kernel_threshold);
}

Eigen::MatrixXd rotate_scores(const Eigen::MatrixXd& stacked_scores, const EigenSystem& eig) {
  if (stacked_scores.cols() != eig.vectors.rows())
    throw DimensionMismatch("score width must match the eigenvector dimension");
  return stacked_scores * eig.vectors;
}

Eigen::MatrixXd cross_moments(const Eigen::MatrixXd& target_scores,
                              const Eigen::MatrixXd& covariate_scores) {
  if (target_scores.rows() != covariate_scores.rows())
    throw DimensionMismatch("cross_moments needs aligned realizations");
  if (target_scores.rows() == 0) throw EmptyPanel("cross_moments needs at least one realization");
  return target_scores.transpose() * covariate_scores /
         static_cast<double>(target_scores.rows());
}

}  // namespace worstrisk
