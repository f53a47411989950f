#include "worstrisk/minimizer.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <iostream>
#include <limits>

namespace worstrisk {

BetaKernel::BetaKernel(BasisPtr row_basis, std::vector<Eigen::MatrixXd> coeff)
    : basis_(std::move(row_basis)), coeff_(std::move(coeff)) {
  if (!basis_) throw DomainError("BetaKernel requires a row basis");
  if (coeff_.empty()) throw DimensionMismatch("BetaKernel needs p >= 1 covariate blocks");
  for (const auto& c : coeff_) {
    if (c.rows() != coeff_.front().rows() || c.cols() != coeff_.front().cols())
      throw DimensionMismatch("BetaKernel blocks must share one shape");
    if (!c.allFinite()) throw DomainError("BetaKernel coefficients must be finite");
  }
}

BetaKernel BetaKernel::from_eigen(BasisPtr row_basis, const Eigen::MatrixXd& lambda,
                                  const Eigen::MatrixXd& directions, int covariates,
                                  int n_basis) {
  if (directions.rows() != static_cast<Eigen::Index>(covariates) * n_basis)
    throw DimensionMismatch("direction rows must be p*N");
  if (lambda.cols() > directions.cols())
    throw DimensionMismatch("more lambda columns than available directions");
  std::vector<Eigen::MatrixXd> coeff;
  coeff.reserve(static_cast<std::size_t>(covariates));
  const Eigen::MatrixXd used = directions.leftCols(lambda.cols());
  for (int i = 0; i < covariates; ++i) {
    // C_i[k, j] = sum_l lambda[k, l] * directions[(i*N + j), l]
    coeff.push_back(lambda * used.middleRows(static_cast<Eigen::Index>(i) * n_basis, n_basis)
                                 .transpose());
  }
  return BetaKernel(std::move(row_basis), std::move(coeff));
}

BetaKernel BetaKernel::zero(BasisPtr row_basis, int covariates, int target_size,
                            int covariate_size) {
  std::vector<Eigen::MatrixXd> coeff(static_cast<std::size_t>(covariates),
                                     Eigen::MatrixXd::Zero(target_size, covariate_size));
  return BetaKernel(std::move(row_basis), std::move(coeff));
}

const Eigen::MatrixXd& BetaKernel::coeff(int covariate) const {
  if (covariate < 0 || covariate >= covariates())
    throw DomainError("covariate index out of range");
  return coeff_[static_cast<std::size_t>(covariate)];
}

Eigen::MatrixXd BetaKernel::stacked() const {
  Eigen::MatrixXd out(target_size(), static_cast<Eigen::Index>(coeff_.size()) * covariate_size());
  for (std::size_t i = 0; i < coeff_.size(); ++i)
    out.middleCols(static_cast<Eigen::Index>(i) * covariate_size(), covariate_size()) = coeff_[i];
  return out;
}

double BetaKernel::squared_norm() const {
  double s = 0.0;
  for (const auto& c : coeff_) s += c.squaredNorm();
  return s;
}

double BetaKernel::frobenius_distance(const BetaKernel& other) const {
  const Eigen::Index tr = std::max(target_size(), other.target_size());
  const Eigen::Index cr = std::max(covariate_size(), other.covariate_size());
  const BetaKernel a = embedded(tr, cr);
  const BetaKernel b = other.embedded(tr, cr);
  if (a.covariates() != b.covariates())
    throw DimensionMismatch("kernels compare over the same covariates");
  double s = 0.0;
  for (int i = 0; i < a.covariates(); ++i) s += (a.coeff(i) - b.coeff(i)).squaredNorm();
  return std::sqrt(s);
}

double BetaKernel::eval(double t, double tau, int covariate) const {
  const BasisSet& b = *basis_;
  const double lo = b.t_start();
  const double hi = b.t_end();
  const double slack = 1e-12 * (hi - lo);
  if (t < lo - slack || t > hi + slack || tau < lo - slack || tau > hi + slack)
    throw DomainError("beta_eval arguments must lie in the basis interval");
  const auto& c = coeff(covariate);
  Eigen::VectorXd pt(c.rows());
  for (Eigen::Index k = 0; k < c.rows(); ++k) pt[k] = b.eval(static_cast<int>(k), t);
  Eigen::VectorXd ptau(c.cols());
  for (Eigen::Index l = 0; l < c.cols(); ++l) ptau[l] = b.eval(static_cast<int>(l), tau);
  return pt.dot(c * ptau);
}

BetaKernel BetaKernel::embedded(Eigen::Index tr, Eigen::Index cr) const {
  std::vector<Eigen::MatrixXd> coeff;
  coeff.reserve(coeff_.size());
  for (const auto& c : coeff_) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(tr, cr);
    m.topLeftCorner(std::min(tr, c.rows()), std::min(cr, c.cols())) =
        c.topLeftCorner(std::min(tr, c.rows()), std::min(cr, c.cols()));
    coeff.push_back(std::move(m));
  }
  return BetaKernel(basis_, std::move(coeff));
}

double beta_eval(const BetaKernel& beta, double t, double tau, int covariate) {
  return beta.eval(t, tau, covariate);
}

EigenbasisResult eigenbasis_minimizer(const EigenSystem& pooled_eigen,
                                      const Eigen::MatrixXd& cross_shifted,
                                      const Eigen::MatrixXd& cross_obs,
                                      const Eigen::VectorXd& denom_shifted,
                                      const Eigen::VectorXd& denom_obs, double gamma,
                                      BasisPtr row_basis, int covariates,
                                      double summability_guard) {
  if (!(gamma > 0.0)) throw InvalidGamma("eigenbasis_minimizer requires gamma > 0");
  const Eigen::Index L = denom_shifted.size();
  if (denom_obs.size() != L || cross_shifted.cols() != L || cross_obs.cols() != L ||
      cross_shifted.rows() != cross_obs.rows())
    throw DimensionMismatch("eigenbasis_minimizer moment shapes disagree");
  if (pooled_eigen.vectors.cols() < L)
    throw DimensionMismatch("more moment columns than eigendirections");

  const Eigen::VectorXd denom = gamma * denom_shifted + (1.0 - gamma) * denom_obs;
  const double max_denom = denom.cwiseAbs().maxCoeff();
  if (max_denom <= 0.0) throw DegenerateCovariates("all pooled denominators vanish");

  const Eigen::MatrixXd num = gamma * cross_shifted + (1.0 - gamma) * cross_obs;
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(num.rows(), L);
  EigenbasisReport report;
  report.pooled_denominators = denom;
  int live = 0;
  for (Eigen::Index l = 0; l < L; ++l) {
    if (std::abs(denom[l]) < summability_guard * max_denom) {
      report.kernel_directions.push_back(static_cast<int>(l));
      continue;  // numerical Ker: minimum-norm coset representative keeps 0
    }
    lambda.col(l) = num.col(l) / denom[l];
    ++live;
  }
  if (live == 0) throw DegenerateCovariates("every pooled denominator is below the guard");

  report.lambda_tail_mass.resize(static_cast<std::size_t>(L));
  double tail = 0.0;
  for (Eigen::Index l = L - 1; l >= 0; --l) {
    tail += lambda.col(l).squaredNorm();
    report.lambda_tail_mass[static_cast<std::size_t>(l)] = tail;
  }

  const int n_basis = static_cast<int>(pooled_eigen.vectors.rows()) / covariates;
  BetaKernel beta = BetaKernel::from_eigen(std::move(row_basis), lambda,
                                           pooled_eigen.vectors, covariates, n_basis);
  return EigenbasisResult{std::move(beta), std::move(lambda), std::move(report)};
}

namespace {

double symmetric_condition(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
  const double lo = es.eigenvalues().cwiseAbs().minCoeff();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

Eigen::MatrixXd solve_columns(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& rhs_cols,
                              double condition) {
  if (condition <= 1e12) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() == Eigen::Success) return ldlt.solve(rhs_cols);
  }
  return gram.colPivHouseholderQr().solve(rhs_cols);
}

std::vector<Eigen::MatrixXd> split_solution(const Eigen::MatrixXd& solution, int covariates) {
  // solution is (p*N_c) x N_t; block i holds lambda_{i, ., .}^t
  const Eigen::Index nc = solution.rows() / covariates;
  std::vector<Eigen::MatrixXd> coeff;
  coeff.reserve(static_cast<std::size_t>(covariates));
  for (int i = 0; i < covariates; ++i)
    coeff.push_back(solution.middleRows(static_cast<Eigen::Index>(i) * nc, nc).transpose());
  return coeff;
}

}  // namespace

GramResult gram_minimizer(const GramSystem& gram, BasisPtr row_basis, int covariates,
                          SingularPolicy policy) {
  const Eigen::Index q = gram.gram.rows();
  if (gram.gram.cols() != q) throw DimensionMismatch("Gram matrix must be square");
  if (gram.rhs.cols() != q) throw DimensionMismatch("rhs width must match the Gram matrix");
  if (q % covariates != 0) throw DimensionMismatch("Gram size must be divisible by p");
  const double scale = std::max(1.0, gram.gram.cwiseAbs().maxCoeff());
  if ((gram.gram - gram.gram.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw NotSymmetric("Gram matrix must be symmetric");

  const double condition = gram.condition > 0.0 ? gram.condition : symmetric_condition(gram.gram);
  const bool singular = !std::isfinite(condition) || condition > 1e14;
  if (singular) {
    switch (policy) {
      case SingularPolicy::Error:
        throw SingularGram("singular pooled Grammian (condition " + std::to_string(condition) +
                           ")");
      case SingularPolicy::PseudoInverse: {
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gram.gram);
        const Eigen::MatrixXd sol = cod.solve(gram.rhs.transpose());
        return GramResult{BetaKernel(std::move(row_basis), split_solution(sol, covariates)),
                          false};
      }
      case SingularPolicy::PaperSentinel: {
        const auto n = gram.truncation() / covariates;
        std::cerr << "worstrisk: WARNING: singular Grammian; returning the sentinel "
                     "coefficient vector ("
                  << n << ", ..., " << n << ") - this is a proof device, not an estimate\n";
        std::vector<Eigen::MatrixXd> coeff(
            static_cast<std::size_t>(covariates),
            Eigen::MatrixXd::Constant(gram.rhs.rows(), n, static_cast<double>(n)));
        return GramResult{BetaKernel(std::move(row_basis), std::move(coeff)), true};
      }
    }
  }
  const Eigen::MatrixXd sol = solve_columns(gram.gram, gram.rhs.transpose(), condition);
  return GramResult{BetaKernel(std::move(row_basis), split_solution(sol, covariates)), false};
}

BetaKernel plugin_estimator(const Eigen::MatrixXd& gram_shifted, const Eigen::MatrixXd& gram_obs,
                            const Eigen::MatrixXd& rotated_shifted,
                            const Eigen::MatrixXd& rotated_obs, double gamma, BasisPtr row_basis,
                            int covariates) {
  if (gram_shifted.rows() != gram_obs.rows() || rotated_shifted.rows() != gram_shifted.rows() ||
      rotated_obs.rows() != gram_obs.rows() || rotated_shifted.cols() != rotated_obs.cols())
    throw DimensionMismatch("plugin_estimator moment shapes disagree");
  GramSystem gram;
  gram.gram = gamma * gram_shifted + (1.0 - gamma) * gram_obs;
  gram.gram = 0.5 * (gram.gram + gram.gram.transpose());
  gram.rhs = (gamma * rotated_shifted + (1.0 - gamma) * rotated_obs).transpose();
  gram.gamma = gamma;
  gram.condition = symmetric_condition(gram.gram);
  if (!std::isfinite(gram.condition) || gram.condition > 1e14)
    throw SingularGram("singular pooled empirical Grammian");
  return gram_minimizer(gram, std::move(row_basis), covariates, SingularPolicy::Error).beta;
}

}  // namespace worstrisk
