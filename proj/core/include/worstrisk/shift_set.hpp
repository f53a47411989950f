#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "worstrisk/basis.hpp"
#include "worstrisk/covariance.hpp"

namespace worstrisk {

/// One test function for the quadratic-form membership check, held as its
/// channel-stacked basis coefficient vector (unit norm).
struct TestFunction {
  std::string kind;          // "basis", "pair", "step", "monomial", "eigen"
  Eigen::VectorXd coeffs;    // length d*N
};

struct MercerWitness {
  TestFunction g;
  double form_value = 0.0;  // normalized quadratic form of gamma*K_ref - K_cand
};

struct MercerResult {
  bool member = true;
  std::optional<MercerWitness> witness;
  std::size_t tests_evaluated = 0;
  double min_form = 0.0;
};

/// Family of test functions: the basis functions per channel, signed channel
/// pairs of basis functions, step functions on dyadic partitions, monomials,
/// and (by default) the eigendirections of the difference operator itself,
/// which makes the check decisive on the represented subspace.
struct TestFamilySpec {
  BasisPtr basis;            // needed for step/monomial coefficients; may be null
  int monomial_degree = 4;
  int dyadic_depth = 5;
  bool include_pairs = true;
  bool include_eigen_directions = true;
};

/// Membership of `candidate` in the level-gamma out-of-sample set around
/// `reference`: every test form of gamma*K_ref - K_cand must be >= -tol
/// (relative to the spectral norm of the difference).
MercerResult mercer_check(const CovOperator& candidate, const CovOperator& reference,
                          double gamma, const TestFamilySpec& family, double tol = 1e-10);

/// Finite-basis criterion: gamma*reference - candidate is PSD up to a relative
/// tolerance.
bool finite_basis_psd_check(const Eigen::MatrixXd& candidate, const Eigen::MatrixXd& reference,
                            double gamma, double tol = 1e-10);

/// Matrix-valued autocovariance tabulated on a symmetric, uniformly spaced lag
/// grid; value[j] is k(lags[j]) and k(-h) = k(h)^t.
struct LagCov {
  Eigen::VectorXd lags;
  std::vector<Eigen::MatrixXd> value;

  void validate() const;
  Eigen::Index channels() const { return value.empty() ? 0 : value.front().rows(); }
};

LagCov scale_lagcov(const LagCov& k, double factor);

struct WssResult {
  bool member = true;
  int witness_bin = -1;
  double witness_freq = 0.0;  // angular frequency
  double min_eig = 0.0;       // relative to the largest spectral norm over bins
};

/// Stationary criterion: the zero-padded DFT of gamma*k - k' must be PSD at
/// every frequency bin.
WssResult wss_fft_check(const LagCov& candidate, const LagCov& reference, double gamma,
                        double freq_tol = 1e-10);

}  // namespace worstrisk
