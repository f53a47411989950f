#include "worstrisk/sem.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "worstrisk/rng.hpp"

namespace worstrisk {

namespace {

// Cholesky-like factor of a PSD matrix; falls back to an eigenvalue square
// root when the matrix is only semi-definite.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& m, const char* what) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw NotSymmetric(std::string(what) + " must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < -1e-8 * scale)
    throw DomainError(std::string(what) + " must be positive semidefinite");
  return es.eigenvectors() *
         es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

}  // namespace

SemSpec make_sem_spec(int covariates, int n_basis, Eigen::MatrixXd structural,
                      Eigen::MatrixXd noise_cov, OperatorKind kind) {
  if (covariates < 1) throw DimensionMismatch("SemSpec needs p >= 1");
  if (n_basis < 1) throw DimensionMismatch("SemSpec needs N >= 1");
  SemSpec spec;
  spec.covariates = covariates;
  spec.n_basis = n_basis;
  spec.kind = kind;
  const auto d = static_cast<Eigen::Index>(covariates + 1) * n_basis;
  if (structural.rows() != d || structural.cols() != d)
    throw DimensionMismatch("structural matrix must be (p+1)N x (p+1)N");
  if (noise_cov.rows() != d || noise_cov.cols() != d)
    throw DimensionMismatch("noise covariance must be (p+1)N x (p+1)N");
  psd_factor(noise_cov, "noise covariance");  // validates symmetry + PSD

  const Eigen::MatrixXd solve_mat = Eigen::MatrixXd::Identity(d, d) - structural;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(solve_mat);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin <= smax * 1e-14)
    throw SingularSystem("I - B is singular");
  spec.solve_condition = smax / smin;
  spec.structural = std::move(structural);
  spec.noise_cov = std::move(noise_cov);
  return spec;
}

SemSpec chain_preset(int n_basis, double b_x1y, double b_yx2) {
  Eigen::Matrix3d b3 = Eigen::Matrix3d::Zero();
  b3(0, 1) = b_x1y;  // target row picks up X(1)
  b3(2, 0) = b_yx2;  // X(2) row picks up the target
  const auto d = static_cast<Eigen::Index>(3 * n_basis);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (b3(i, j) != 0.0)
        b.block(i * n_basis, j * n_basis, n_basis, n_basis) =
            b3(i, j) * Eigen::MatrixXd::Identity(n_basis, n_basis);
  return make_sem_spec(2, n_basis, std::move(b), Eigen::MatrixXd::Identity(d, d));
}

ShiftSpec make_shift_spec(int covariates, int n_basis, Eigen::VectorXd mean, Eigen::MatrixXd cov,
                          std::vector<int> affected_blocks) {
  const auto d = static_cast<Eigen::Index>(covariates + 1) * n_basis;
  if (mean.size() != d || cov.rows() != d || cov.cols() != d)
    throw DimensionMismatch("shift mean/cov must live on the (p+1)N coefficient space");
  psd_factor(cov, "shift covariance");
  std::vector<bool> affected(static_cast<std::size_t>(covariates + 1), false);
  for (int b : affected_blocks) {
    if (b < 0 || b > covariates) throw DimensionMismatch("affected block out of range");
    affected[static_cast<std::size_t>(b)] = true;
  }
  for (int b = 0; b <= covariates; ++b) {
    if (affected[static_cast<std::size_t>(b)]) continue;
    const auto off = static_cast<Eigen::Index>(b) * n_basis;
    if (mean.segment(off, n_basis).cwiseAbs().maxCoeff() > 0.0 ||
        cov.middleRows(off, n_basis).cwiseAbs().maxCoeff() > 0.0 ||
        cov.middleCols(off, n_basis).cwiseAbs().maxCoeff() > 0.0)
      throw DomainError("unaffected shift blocks must have zero mean and covariance");
  }
  ShiftSpec s;
  s.mean = std::move(mean);
  s.cov = std::move(cov);
  s.affected_blocks = std::move(affected_blocks);
  return s;
}

ShiftSpec chain_shift(int n_basis, double mean, double sd) {
  const auto d = static_cast<Eigen::Index>(3 * n_basis);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  const double m2 = mean * mean;
  const double v = sd * sd;
  for (int k = 0; k < n_basis; ++k) {
    const auto i1 = static_cast<Eigen::Index>(n_basis + k);      // xi_1 block
    const auto i2 = static_cast<Eigen::Index>(2 * n_basis + k);  // xi_2 block
    cov(i1, i1) = m2 + v;
    cov(i2, i2) = m2 + v;
    cov(i1, i2) = m2;
    cov(i2, i1) = m2;
  }
  return make_shift_spec(2, n_basis, std::move(mu), std::move(cov), {1, 2});
}

SemDraws solve_sem_draws(const SemSpec& spec, const std::optional<ShiftSpec>& shift,
                         std::size_t n, std::uint64_t seed) {
  if (spec.kind != OperatorKind::ScoreLinear)
    throw DomainError("solve_sem handles score-linear systems; render and apply_multiplicative otherwise");
  if (n < 1) throw EmptyPanel("solve_sem needs n >= 1");
  const auto d = spec.dim();
  const Eigen::MatrixXd solve_mat = Eigen::MatrixXd::Identity(d, d) - spec.structural;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(solve_mat);
  const Eigen::MatrixXd noise_factor = psd_factor(spec.noise_cov, "noise covariance");
  Eigen::MatrixXd shift_factor;
  if (shift) shift_factor = psd_factor(shift->cov, "shift covariance");

  SemDraws out;
  out.noise.resize(static_cast<Eigen::Index>(n), d);
  out.shift = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), d);
  Eigen::MatrixXd stacked(static_cast<Eigen::Index>(n), d);
  for (std::size_t m = 0; m < n; ++m) {
    Rng noise_rng = Rng::substream(seed, m, 0);
    Eigen::VectorXd eps = noise_factor * noise_rng.normal_vector(d);
    Eigen::VectorXd a = Eigen::VectorXd::Zero(d);
    if (shift) {
      Rng shift_rng = Rng::substream(seed, m, 1);
      a = shift->mean + shift_factor * shift_rng.normal_vector(d);
    }
    out.noise.row(static_cast<Eigen::Index>(m)) = eps.transpose();
    out.shift.row(static_cast<Eigen::Index>(m)) = a.transpose();
    stacked.row(static_cast<Eigen::Index>(m)) = lu.solve(a + eps).transpose();
  }
  out.scores = ScorePanel::from_stacked(stacked, spec.covariates, spec.n_basis);
  return out;
}

ScorePanel solve_sem(const SemSpec& spec, const std::optional<ShiftSpec>& shift, std::size_t n,
                     std::uint64_t seed) {
  return solve_sem_draws(spec, shift, n, seed).scores;
}

Eigen::MatrixXd population_second_moment(const SemSpec& spec,
                                         const Eigen::MatrixXd* shift_second_moment) {
  const auto d = spec.dim();
  Eigen::MatrixXd inner = spec.noise_cov;
  if (shift_second_moment) {
    if (shift_second_moment->rows() != d || shift_second_moment->cols() != d)
      throw DimensionMismatch("shift second moment must be (p+1)N x (p+1)N");
    inner += *shift_second_moment;
  }
  const Eigen::MatrixXd solve_mat = Eigen::MatrixXd::Identity(d, d) - spec.structural;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(solve_mat);
  const Eigen::MatrixXd si = lu.solve(Eigen::MatrixXd::Identity(d, d));
  return si * inner * si.transpose();
}

CurvePanel render_curves(const ScorePanel& scores, const BasisSet& basis, const GridPtr& grid,
                         std::string label) {
  if (scores.n_basis() != basis.size())
    throw DimensionMismatch("score dimension must equal the basis size");
  const Eigen::MatrixXd tab = basis.tabulate(*grid);  // m x N
  std::vector<Eigen::MatrixXd> channels;
  channels.reserve(static_cast<std::size_t>(scores.covariate_count()) + 1);
  channels.push_back(scores.target * tab.transpose());
  for (const auto& cov : scores.covariates) channels.push_back(cov * tab.transpose());
  return CurvePanel(grid, std::move(channels), std::move(label));
}

CurveSystem apply_multiplicative(const std::vector<Eigen::VectorXd>& g, const CurveSystem& sys,
                                 double floor) {
  const auto p1 = static_cast<std::size_t>(sys.covariate_count()) + 1;
  if (g.size() != p1)
    throw DimensionMismatch("apply_multiplicative needs one multiplier per channel");
  const TimeGrid& grid = *sys.grid();
  auto transform = [&](const SampledCurve& c, const Eigen::VectorXd& gi) {
    if (static_cast<std::size_t>(gi.size()) != grid.size())
      throw GridMismatch("multiplier must be tabulated on the system grid");
    Eigen::VectorXd denom = Eigen::VectorXd::Ones(gi.size()) - gi;
    if (denom.cwiseAbs().minCoeff() < floor)
      throw NearSingularMultiplier("|1 - g(t)| fell below the configured floor");
    return SampledCurve(c.grid, c.values.cwiseQuotient(denom), c.interpretation);
  };
  SampledCurve y = transform(sys.target, g[0]);
  std::vector<SampledCurve> xs;
  xs.reserve(p1 - 1);
  for (std::size_t j = 1; j < p1; ++j)
    xs.push_back(transform(sys.covariates[j - 1], g[j]));
  return CurveSystem(std::move(y), std::move(xs));
}

}  // namespace worstrisk
