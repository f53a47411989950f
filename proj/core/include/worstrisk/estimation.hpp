#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "worstrisk/minimizer.hpp"
#include "worstrisk/partition.hpp"
#include "worstrisk/quadrature.hpp"

namespace worstrisk {

/// Disjoint realization index sets: numerator scores, denominator scores, and
/// eigenfunction estimation each get their own samples, which is what makes
/// the consistency argument go through.
struct SplitPlan {
  std::vector<std::size_t> numerator;
  std::vector<std::size_t> denominator;
  std::vector<std::size_t> eigen;

  void validate(std::size_t panel_size) const;
};

/// Deterministic shuffle split with floor(fraction * n) sizes.
SplitPlan make_split(std::size_t n, std::array<double, 3> fractions, std::uint64_t seed);

struct EstimatorConfig {
  double gamma = 0.5;
  /// Norm clamp M applied to estimated eigenfunctions (must be > 1).
  double truncation_m = 10.0;
  /// Truncation-level schedule e(n); defaults to floor(n^{1/4}). The value is
  /// always capped by the available dimension (N for target indices, p*N for
  /// eigendirections) and by e_cap when positive.
  std::function<int(std::size_t)> e_schedule;
  int e_cap = 0;
  /// Partition mesh schedule d(n); defaults to n^{-1/3} * mesh_scale, with the
  /// scale derived from the data's channel ranges when left at 0.
  std::function<double(std::size_t)> mesh_schedule;
  double mesh_scale = 0.0;
  /// Center all scores by observational-split means (the centralized variant).
  bool centralize = false;
  /// Reuse the numerator split for the denominator (the no-split variant that
  /// needs fourth moments; exposed as a flag only).
  bool reuse_splits = false;
};

/// Per-channel L2 norm clamp: blocks with norm <= M pass through, larger ones
/// are scaled down to norm M.
Eigen::VectorXd truncate_norm(const Eigen::VectorXd& stacked_coeffs, int channels, double M);

/// Eigensystem of the empirical pooled covariate operator built from the
/// eigen split only. `center` subtracts the observational split means first.
EigenSystem estimate_eigenfunctions(const CurvePanel& panel_shifted,
                                    const CurvePanel& panel_obs,
                                    const std::vector<std::size_t>& ids, const BasisSet& basis,
                                    double gamma, bool center = false);

/// Eigenbasis-route estimator: adaptive partitions at mesh d(n), step-projected
/// scores against estimated eigenfunctions (numerator split), separately
/// estimated denominators, output against phi x T_M(psi_hat).
BetaKernel eigenbasis_estimator(const CurvePanel& panel_shifted, const CurvePanel& panel_obs,
                          const SplitPlan& split, const EstimatorConfig& cfg,
                          const BasisSet& basis);

/// Centralized variant: all scores centered by observational-split means.
BetaKernel eigenbasis_estimator_centered(const CurvePanel& panel_shifted, const CurvePanel& panel_obs,
                            const SplitPlan& split, const EstimatorConfig& cfg,
                            const BasisSet& basis);

/// Fixed-basis route: empirical Gram assembly from step-projected scores in
/// the row basis, per-target-index solves.
BetaKernel fixed_basis_estimator(const CurvePanel& panel_shifted, const CurvePanel& panel_obs,
                          const SplitPlan& split, const EstimatorConfig& cfg,
                          const BasisSet& basis);

}  // namespace worstrisk
