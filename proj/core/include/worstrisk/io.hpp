#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "worstrisk/grid.hpp"
#include "worstrisk/minimizer.hpp"
#include "worstrisk/risk.hpp"

namespace worstrisk {

/// Deterministic, locale-independent float formatting used by every writer.
std::string format_double(double v);

/// Curve panel CSV: `realization,channel,t,value` with channel in {Y, X1..Xp}.
void write_curve_panel_csv(const CurvePanel& panel, const std::filesystem::path& path);
CurvePanel read_curve_panel_csv(const std::filesystem::path& path, const std::string& label);

/// Row-major matrix CSV with block labels in the header.
void write_matrix_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& col_labels,
                      const std::filesystem::path& path);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

/// Kernel coefficients: `covariate,k,l,lambda` (1-based indices).
void write_beta_kernel_csv(const BetaKernel& beta, const std::filesystem::path& path);
std::vector<Eigen::MatrixXd> read_beta_coeffs_csv(const std::filesystem::path& path);

/// Rendered kernel surface on a uniform (t, tau) grid: `t,tau,value`, t-major.
void emit_surface(const BetaKernel& beta, int covariate, int resolution,
                  const std::filesystem::path& path);

/// Decomposition harness report: `candidate_id,admissible,risk,is_scaled_A`
/// plus a trailing summary line.
void write_decomposition_csv(const DecompositionReport& report,
                             const std::filesystem::path& path);

struct EstimationRecord {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double gamma = 0.0;
  std::string route;
  double coeff_error = 0.0;
  double frobenius_error = 0.0;
  double runtime_ms = 0.0;
};

/// Estimation report: `n,seed,gamma,route,coeff_error,frobenius_error,runtime_ms`.
void write_estimation_csv(const std::vector<EstimationRecord>& records,
                          const std::filesystem::path& path);

/// FNV-1a hash of a file's bytes, for run manifests.
std::uint64_t hash_file(const std::filesystem::path& path);

}  // namespace worstrisk
