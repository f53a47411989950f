#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "worstrisk/basis.hpp"
#include "worstrisk/grid.hpp"
#include "worstrisk/quadrature.hpp"

namespace worstrisk {

enum class OperatorKind { ScoreLinear, Multiplicative };

/// Score-space structural system x = B x + a + eps over (p+1) channels of N
/// basis coefficients each, target block first. Solved as x = (I-B)^{-1}(a+eps).
struct SemSpec {
  int covariates = 0;            // p
  int n_basis = 0;               // N
  Eigen::MatrixXd structural;    // B, (p+1)N x (p+1)N
  Eigen::MatrixXd noise_cov;     // Sigma, symmetric PSD
  OperatorKind kind = OperatorKind::ScoreLinear;
  double solve_condition = 0.0;  // condition number of (I-B), filled on validation
  // Multiplicative systems carry per-channel multipliers g_1..g_{p+1}
  // tabulated on a grid; realized through apply_multiplicative after
  // rendering the driving noise.
  std::vector<Eigen::VectorXd> multipliers;
  GridPtr multiplier_grid;

  Eigen::Index dim() const { return static_cast<Eigen::Index>((covariates + 1)) * n_basis; }
};

/// Validates invertibility of (I-B) and PSD-ness of the noise covariance;
/// records the condition number of (I-B).
SemSpec make_sem_spec(int covariates, int n_basis, Eigen::MatrixXd structural,
                      Eigen::MatrixXd noise_cov,
                      OperatorKind kind = OperatorKind::ScoreLinear);

/// The three-variable chain X(1) -> Y -> X(2) with homogeneous unit effects
/// across all basis dimensions and standard normal noise.
SemSpec chain_preset(int n_basis = 10, double b_x1y = 1.0, double b_yx2 = 1.0);

/// Additive random shift on a subset of channels. mean/cov live on the full
/// (p+1)N coefficient space; unaffected blocks must be zero.
struct ShiftSpec {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::vector<int> affected_blocks;  // channel ids, 0 = target

  Eigen::MatrixXd second_moment() const { return cov + mean * mean.transpose(); }
};

ShiftSpec make_shift_spec(int covariates, int n_basis, Eigen::VectorXd mean, Eigen::MatrixXd cov,
                          std::vector<int> affected_blocks);

/// Score shift on both covariates of the chain preset. Per basis dimension the
/// two covariate shift coordinates have second moment `mean^2 + sd^2` and cross
/// moment `mean^2`, independently across dimensions; this is the moment
/// structure of per-coordinate draws with mean `mean` and standard deviation
/// `sd`, realized here as a mean-zero Gaussian with a shared per-dimension
/// factor so the population minimizer stays homogeneous across dimensions.
ShiftSpec chain_shift(int n_basis = 10, double mean = 0.1, double sd = 0.1);

struct SemDraws {
  ScorePanel scores;
  Eigen::MatrixXd noise;  // n x (p+1)N
  Eigen::MatrixXd shift;  // n x (p+1)N, zero when no shift
};

/// Draws eps ~ N(0, Sigma) and, when given, alpha ~ N(mean, cov) from
/// independent sub-streams, and returns x = (I-B)^{-1}(alpha + eps) per
/// realization. Deterministic in (spec, shift, n, seed).
ScorePanel solve_sem(const SemSpec& spec, const std::optional<ShiftSpec>& shift, std::size_t n,
                     std::uint64_t seed);
/// Same, but also exposes the raw draws (used by the independence checks).
SemDraws solve_sem_draws(const SemSpec& spec, const std::optional<ShiftSpec>& shift,
                         std::size_t n, std::uint64_t seed);

/// Population second moment of the stacked scores, E[x x^t] =
/// (I-B)^{-1} (S_a + Sigma) (I-B)^{-t}, with S_a the shift second moment
/// (zero for the observational environment).
Eigen::MatrixXd population_second_moment(const SemSpec& spec,
                                         const Eigen::MatrixXd* shift_second_moment = nullptr);

/// Tabulates each realization's channels as sum_k score_k phi_k(t).
CurvePanel render_curves(const ScorePanel& scores, const BasisSet& basis, const GridPtr& grid,
                         std::string label = "custom");

/// Channel-wise pointwise product with 1/(1 - g_i). The multipliers are
/// tabulated on the system's grid; |1 - g_i(t)| must stay above `floor`.
CurveSystem apply_multiplicative(const std::vector<Eigen::VectorXd>& g, const CurveSystem& sys,
                                 double floor = 1e-6);

}  // namespace worstrisk
