#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "worstrisk/basis.hpp"
#include "worstrisk/covariance.hpp"

namespace worstrisk {

/// Regression kernel beta(i)(t,tau) = sum_{k,l} lambda_{i,k,l} phi_k(t) phi_l(tau),
/// held per covariate as an (N_t x N_c) coefficient matrix in the row basis.
/// Kernels built against an eigen system are rendered into these coordinates at
/// construction; rendered values are invariant to eigenvector sign choices.
class BetaKernel {
 public:
  BetaKernel(BasisPtr row_basis, std::vector<Eigen::MatrixXd> coeff);

  /// lambda is (N_t x L) against eigendirections; `directions` maps each
  /// direction to channel-stacked row-basis coefficients (p*N_c x L).
  static BetaKernel from_eigen(BasisPtr row_basis, const Eigen::MatrixXd& lambda,
                               const Eigen::MatrixXd& directions, int covariates, int n_basis);
  static BetaKernel zero(BasisPtr row_basis, int covariates, int target_size, int covariate_size);

  int covariates() const { return static_cast<int>(coeff_.size()); }
  Eigen::Index target_size() const { return coeff_.front().rows(); }
  Eigen::Index covariate_size() const { return coeff_.front().cols(); }
  const BasisPtr& row_basis() const { return basis_; }

  const Eigen::MatrixXd& coeff(int covariate) const;
  /// N_t x (p * N_c), covariate blocks side by side.
  Eigen::MatrixXd stacked() const;

  double squared_norm() const;  // Parseval: sum of squared coefficients
  double frobenius_distance(const BetaKernel& other) const;

  /// beta(i)(t, tau); throws DomainError outside the basis interval.
  double eval(double t, double tau, int covariate) const;

  /// Zero-pads (or truncates) the coefficient blocks to the given shape.
  BetaKernel embedded(Eigen::Index target_size, Eigen::Index covariate_size) const;

 private:
  BasisPtr basis_;
  std::vector<Eigen::MatrixXd> coeff_;
};

/// Diagnostics from the eigenbasis route: pooled denominators, directions
/// treated as numerical kernel of the pooled operator, and the tail mass of
/// lambda^2 over the direction index (a heuristic trend report only; square
/// summability cannot be certified at finite truncation).
struct EigenbasisReport {
  Eigen::VectorXd pooled_denominators;
  std::vector<int> kernel_directions;
  std::vector<double> lambda_tail_mass;
};

struct EigenbasisResult {
  BetaKernel beta;
  Eigen::MatrixXd lambda;  // N_t x L against the eigendirections
  EigenbasisReport report;
};

/// Coefficient quotient against the pooled-operator eigenbasis. Directions
/// whose pooled denominator falls below guard * max are reported as kernel
/// directions and given zero coefficient (the minimum-norm coset choice).
EigenbasisResult eigenbasis_minimizer(const EigenSystem& pooled_eigen,
                                      const Eigen::MatrixXd& cross_shifted,
                                      const Eigen::MatrixXd& cross_obs,
                                      const Eigen::VectorXd& denom_shifted,
                                      const Eigen::VectorXd& denom_obs, double gamma,
                                      BasisPtr row_basis, int covariates,
                                      double summability_guard = 1e-12);

struct GramSystem {
  Eigen::MatrixXd gram;  // (p*N) x (p*N), pooled
  Eigen::MatrixXd rhs;   // N_t x (p*N), per-target-index right-hand sides
  double gamma = 0.0;
  double condition = 0.0;

  Eigen::Index truncation() const { return gram.rows(); }
};

enum class SingularPolicy { Error, PseudoInverse, PaperSentinel };

struct GramResult {
  BetaKernel beta;
  bool used_sentinel = false;
};

/// Solves gram * lambda_k = rhs_k for every target index. Symmetric-definite
/// factorization with a column-pivoted fallback past condition 1e12. The
/// sentinel policy fills the coefficients with the truncation level and warns
/// loudly; it exists for parity with the defining formula, not for use.
GramResult gram_minimizer(const GramSystem& gram, BasisPtr row_basis, int covariates,
                          SingularPolicy policy = SingularPolicy::Error);

/// Empirical score Grammians and rotated responses, one linear solve:
/// [gamma*GA + (1-gamma)*GO]^{-1} [gamma*ZA + (1-gamma)*ZO].
/// G matrices are (p*N x p*N); Z matrices are (p*N x N_t).
BetaKernel plugin_estimator(const Eigen::MatrixXd& gram_shifted, const Eigen::MatrixXd& gram_obs,
                            const Eigen::MatrixXd& rotated_shifted,
                            const Eigen::MatrixXd& rotated_obs, double gamma, BasisPtr row_basis,
                            int covariates);

double beta_eval(const BetaKernel& beta, double t, double tau, int covariate);

}  // namespace worstrisk
