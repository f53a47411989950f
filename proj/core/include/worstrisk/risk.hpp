#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "worstrisk/minimizer.hpp"
#include "worstrisk/sem.hpp"

namespace worstrisk {

/// Score second moments truncated at the working basis sizes: E[Z_k^2],
/// E[Z_k x_l] and E[x x^t], where x are the stacked covariate scores in either
/// the row basis or an eigenbasis.
struct SecondMoments {
  Eigen::VectorXd target_sq;  // N_t
  Eigen::MatrixXd cross;      // N_t x q
  Eigen::MatrixXd covariate;  // q x q

  static SecondMoments from_joint(const Eigen::MatrixXd& joint, int covariates, int n_basis);
  static SecondMoments from_scores(const ScorePanel& scores);
  /// Rotate the covariate coordinates into an eigenbasis.
  SecondMoments rotated(const EigenSystem& eig) const;
};

/// Population moments of an environment given its shift second moment
/// (nullptr = observational).
SecondMoments population_moments(const SemSpec& spec,
                                 const Eigen::MatrixXd* shift_second_moment = nullptr);

/// Closed-form risk sum_k ( E[Z_k^2] - 2 lambda_k . E[Z_k x] + lambda_k^t E[xx^t] lambda_k ).
double risk_closed_form(const Eigen::MatrixXd& lambda, const SecondMoments& moments);
double risk_closed_form(const BetaKernel& beta, const SecondMoments& moments);

struct RiskMcResult {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Monte Carlo average over realizations of the quadrature-evaluated squared
/// L2 residual of the functional regression.
double risk_mc(const BetaKernel& beta, const CurvePanel& panel, const BasisSet& basis);
RiskMcResult risk_mc_detailed(const BetaKernel& beta, const CurvePanel& panel,
                              const BasisSet& basis);

/// 0.5 (r_shift + r_obs) + (gamma - 0.5)(r_shift - r_obs); equals
/// gamma*r_shift + (1-gamma)*r_obs.
double worst_risk(double r_shift, double r_obs, double gamma);

struct RiskReport {
  double r_obs = 0.0;
  double r_shift = 0.0;
  double r_pooled = 0.0;
  double r_delta = 0.0;
  double gamma = 0.0;
  double worst = 0.0;
};

RiskReport make_risk_report(double r_shift, double r_obs, double gamma);

struct DecompositionCandidate {
  int id = 0;
  bool admissible = false;
  double risk = 0.0;
  bool is_scaled_shift = false;
};

struct DecompositionReport {
  double gamma = 0.0;
  double r_obs = 0.0;
  double r_shift = 0.0;
  double decomposition = 0.0;      // 0.5 R+ + (gamma - 0.5) R_delta
  double max_candidate_risk = 0.0;
  double scaled_shift_risk = 0.0;  // risk at the sqrt(gamma)-scaled observed shift
  double tol = 0.0;
  bool pass = false;
  std::vector<DecompositionCandidate> candidates;
  double mc_r_obs = 0.0, mc_r_obs_se = 0.0;      // filled when mc_check_n > 0
  double mc_r_shift = 0.0, mc_r_shift_se = 0.0;
};

/// Brute-force falsification of the worst-risk decomposition: draws admissible
/// shift covariances under the gamma-scaled dominance constraint (random PSD
/// matrices, spectrally clipped), evaluates each environment's closed-form
/// risk, and checks the maximum against the decomposition with equality at the
/// scaled observed shift. `mc_check_n > 0` additionally verifies the two
/// observed-environment risks by Monte Carlo.
DecompositionReport verify_decomposition(const SemSpec& spec, const ShiftSpec& shift,
                                         const BetaKernel& beta, double gamma,
                                         std::size_t mc_check_n, std::size_t n_candidates,
                                         std::uint64_t seed, double tol = 1e-6);

struct ContinuityReport {
  std::vector<double> distances;
  std::vector<double> gaps;
  double envelope_constant = 0.0;
  bool pass = false;
};

/// Risks along a sequence of shift second moments approaching a limit; passes
/// when the gaps stay under the linear envelope fitted at the farthest point
/// and vanish with the distance.
ContinuityReport risk_continuity_probe(const SemSpec& spec, const BetaKernel& beta,
                                       const std::vector<Eigen::MatrixXd>& shift_moment_sequence,
                                       const Eigen::MatrixXd& limit_moment,
                                       const std::vector<double>& distances);

}  // namespace worstrisk
