#include "worstrisk/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "worstrisk/rng.hpp"

namespace worstrisk {

void SplitPlan::validate(std::size_t panel_size) const {
  if (numerator.empty() || denominator.empty() || eigen.empty())
    throw SplitViolation("every split part must be nonempty");
  std::vector<bool> seen(panel_size, false);
  auto mark = [&](const std::vector<std::size_t>& ids) {
    for (auto i : ids) {
      if (i >= panel_size) throw SplitViolation("split index out of range");
      if (seen[i]) throw SplitViolation("split parts overlap");
      seen[i] = true;
    }
  };
  mark(numerator);
  mark(denominator);
  mark(eigen);
}

SplitPlan make_split(std::size_t n, std::array<double, 3> fractions, std::uint64_t seed) {
  double total = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw SplitViolation("split fractions must be positive");
    total += f;
  }
  if (total > 1.0 + 1e-12) throw SplitViolation("split fractions must sum to at most 1");
  std::array<std::size_t, 3> sizes{};
  for (std::size_t i = 0; i < 3; ++i)
    sizes[i] = static_cast<std::size_t>(std::floor(fractions[i] * static_cast<double>(n)));
  for (auto s : sizes)
    if (s == 0) throw SplitViolation("n too small for three nonempty split parts");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = Rng::substream(seed, 0, 11);
  for (std::size_t i = n; i > 1; --i)
    std::swap(perm[i - 1], perm[rng.index(i)]);

  SplitPlan plan;
  std::size_t at = 0;
  auto take = [&](std::size_t count) {
    std::vector<std::size_t> ids(perm.begin() + static_cast<std::ptrdiff_t>(at),
                                 perm.begin() + static_cast<std::ptrdiff_t>(at + count));
    at += count;
    std::sort(ids.begin(), ids.end());
    return ids;
  };
  plan.numerator = take(sizes[0]);
  plan.denominator = take(sizes[1]);
  plan.eigen = take(sizes[2]);
  return plan;
}

Eigen::VectorXd truncate_norm(const Eigen::VectorXd& stacked_coeffs, int channels, double M) {
  if (!(M > 1.0)) throw InvalidTruncation("truncation level M must exceed 1");
  if (channels < 1 || stacked_coeffs.size() % channels != 0)
    throw DimensionMismatch("stacked coefficient length must be divisible by the channel count");
  const Eigen::Index nb = stacked_coeffs.size() / channels;
  Eigen::VectorXd out = stacked_coeffs;
  for (int c = 0; c < channels; ++c) {
    auto block = out.segment(static_cast<Eigen::Index>(c) * nb, nb);
    const double norm = block.norm();
    if (norm > M) block *= M / norm;
  }
  return out;
}

namespace {

struct PanelPair {
  const CurvePanel& shifted;
  const CurvePanel& obs;

  void check() const {
    if (!same_grid(shifted.grid(), obs.grid()))
      throw GridMismatch("environment panels must share a grid");
    if (shifted.covariate_count() != obs.covariate_count())
      throw DimensionMismatch("environment panels must share p");
    if (shifted.size() != obs.size())
      throw DimensionMismatch("environment panels must be aligned realization-wise");
  }
};

int default_e(std::size_t n) {
  return static_cast<int>(std::floor(std::pow(static_cast<double>(n), 0.25)));
}

double derive_mesh_scale(const PanelPair& p) {
  double total = 0.0;
  std::size_t count = 0;
  for (const CurvePanel* panel : {&p.shifted, &p.obs}) {
    for (int c = 0; c <= panel->covariate_count(); ++c) {
      const auto& ch = panel->channel(c);
      total += (ch.rowwise().maxCoeff() - ch.rowwise().minCoeff()).sum();
      count += static_cast<std::size_t>(ch.rows());
    }
  }
  if (count == 0 || total <= 0.0) return 1.0;
  return total / static_cast<double>(count);
}

struct Schedules {
  int e_target = 0;      // target-index truncation, <= N
  int e_direction = 0;   // direction truncation, <= p*N (or <= N for the fixed-basis route)
  double mesh = 0.0;
};

Schedules resolve_schedules(const EstimatorConfig& cfg, const PanelPair& panels,
                            std::size_t n_num, int n_basis, int direction_dim) {
  Schedules s;
  int e = cfg.e_schedule ? cfg.e_schedule(n_num) : default_e(n_num);
  if (cfg.e_cap > 0) e = std::min(e, cfg.e_cap);
  s.e_target = std::min(e, n_basis);
  s.e_direction = std::min(e, direction_dim);
  const double scale = cfg.mesh_scale > 0.0 ? cfg.mesh_scale : derive_mesh_scale(panels);
  s.mesh = cfg.mesh_schedule ? cfg.mesh_schedule(n_num)
                             : scale * std::pow(static_cast<double>(n_num), -1.0 / 3.0);
  if (!(s.mesh > 0.0)) throw InvalidThreshold("mesh schedule must stay positive");
  return s;
}

// Step-projected scores of one realization pair: Y and covariate channels of
// both environments against the tabulated basis.
struct SteppedScores {
  Eigen::VectorXd y_shifted, y_obs;        // N
  Eigen::VectorXd x_shifted, x_obs;        // p*N stacked
};

SteppedScores stepped_scores(const PanelPair& panels, std::size_t m, double mesh,
                             const Eigen::MatrixXd& wtab, bool covariates_only) {
  const CurveSystem sys_a = panels.shifted.system(m);
  const CurveSystem sys_o = panels.obs.system(m);
  const AdaptivePartition part =
      covariates_only ? adaptive_partition_covariates(sys_a, sys_o, mesh)
                      : adaptive_partition(sys_a, sys_o, mesh);
  const int p = sys_a.covariate_count();
  const auto N = wtab.cols();
  SteppedScores out;
  out.x_shifted.resize(static_cast<Eigen::Index>(p) * N);
  out.x_obs.resize(static_cast<Eigen::Index>(p) * N);
  for (int j = 0; j < p; ++j) {
    out.x_shifted.segment(static_cast<Eigen::Index>(j) * N, N) =
        wtab.transpose() * step_project(sys_a.covariates[static_cast<std::size_t>(j)].values, part);
    out.x_obs.segment(static_cast<Eigen::Index>(j) * N, N) =
        wtab.transpose() * step_project(sys_o.covariates[static_cast<std::size_t>(j)].values, part);
  }
  if (!covariates_only) {
    out.y_shifted = wtab.transpose() * step_project(sys_a.target.values, part);
    out.y_obs = wtab.transpose() * step_project(sys_o.target.values, part);
  }
  return out;
}

Eigen::MatrixXd truncated_directions(const EigenSystem& eig, int e_direction, int channels,
                                     double M) {
  Eigen::MatrixXd w = eig.vectors.leftCols(e_direction);
  for (Eigen::Index c = 0; c < w.cols(); ++c)
    w.col(c) = truncate_norm(w.col(c), channels, M);
  return w;
}

BetaKernel eigenbasis_impl(const CurvePanel& panel_shifted, const CurvePanel& panel_obs,
                     const SplitPlan& split, const EstimatorConfig& cfg, const BasisSet& basis,
                     bool centralize) {
  const PanelPair panels{panel_shifted, panel_obs};
  panels.check();
  split.validate(panels.shifted.size());
  const std::vector<std::size_t>& denom_ids =
      cfg.reuse_splits ? split.numerator : split.denominator;

  const int p = panels.shifted.covariate_count();
  const int N = basis.size();
  const auto schedules =
      resolve_schedules(cfg, panels, split.numerator.size(), N, p * N);
  const int e_k = schedules.e_target;
  const int e_l = schedules.e_direction;
  BasisPtr basis_ptr = std::make_shared<const BasisSet>(basis);
  if (e_k <= 0 || e_l <= 0) return BetaKernel::zero(basis_ptr, p, N, N);

  const EigenSystem psi_hat = estimate_eigenfunctions(panel_shifted, panel_obs, split.eigen,
                                                      basis, cfg.gamma, centralize);
  const Eigen::MatrixXd directions = psi_hat.vectors.leftCols(e_l);  // pN x e_l

  const TimeGrid& grid = *panels.shifted.grid();
  const Eigen::MatrixXd wtab = grid.quad_weights().asDiagonal() * basis.tabulate(grid);

  const auto n_num = static_cast<Eigen::Index>(split.numerator.size());
  Eigen::MatrixXd ca(n_num, e_l), co(n_num, e_l), da(n_num, e_k), do_(n_num, e_k);
  for (Eigen::Index r = 0; r < n_num; ++r) {
    const auto s = stepped_scores(panels, split.numerator[static_cast<std::size_t>(r)],
                                  schedules.mesh, wtab, false);
    ca.row(r) = (directions.transpose() * s.x_shifted).transpose();
    co.row(r) = (directions.transpose() * s.x_obs).transpose();
    da.row(r) = s.y_shifted.head(e_k).transpose();
    do_.row(r) = s.y_obs.head(e_k).transpose();
  }
  const auto n_den = static_cast<Eigen::Index>(denom_ids.size());
  Eigen::MatrixXd cpa(n_den, e_l), cpo(n_den, e_l);
  for (Eigen::Index r = 0; r < n_den; ++r) {
    const auto s = stepped_scores(panels, denom_ids[static_cast<std::size_t>(r)],
                                  schedules.mesh, wtab, true);
    cpa.row(r) = (directions.transpose() * s.x_shifted).transpose();
    cpo.row(r) = (directions.transpose() * s.x_obs).transpose();
  }

  if (centralize) {
    const Eigen::RowVectorXd mu = co.colwise().mean();
    const Eigen::RowVectorXd nu = do_.colwise().mean();
    const Eigen::RowVectorXd mu_p = cpo.colwise().mean();
    ca.rowwise() -= mu;
    co.rowwise() -= mu;
    da.rowwise() -= nu;
    do_.rowwise() -= nu;
    cpa.rowwise() -= mu_p;
    cpo.rowwise() -= mu_p;
  }

  const double g = cfg.gamma;
  const Eigen::MatrixXd numerator =
      (g * da.transpose() * ca + (1.0 - g) * do_.transpose() * co) / static_cast<double>(n_num);
  const Eigen::VectorXd denominator =
      (g * cpa.colwise().squaredNorm() + (1.0 - g) * cpo.colwise().squaredNorm()).transpose() /
      static_cast<double>(n_den);

  Eigen::MatrixXd lambda(e_k, e_l);
  for (int l = 0; l < e_l; ++l) {
    if (!(denominator[l] > 0.0))
      throw DegenerateDenominator("denominator vanished at direction " + std::to_string(l + 1));
    lambda.col(l) = numerator.col(l) / denominator[l];
  }

  const Eigen::MatrixXd rendered =
      truncated_directions(psi_hat, e_l, p, cfg.truncation_m);
  return BetaKernel::from_eigen(basis_ptr, lambda, rendered, p, N).embedded(N, N);
}

}  // namespace

EigenSystem estimate_eigenfunctions(const CurvePanel& panel_shifted, const CurvePanel& panel_obs,
                                    const std::vector<std::size_t>& ids, const BasisSet& basis,
                                    double gamma, bool center) {
  if (ids.empty()) throw EmptyPanel("eigen split must be nonempty");
  const PanelPair panels{panel_shifted, panel_obs};
  panels.check();
  const ScorePanel sa = project_scores(panel_shifted, basis).select(ids);
  const ScorePanel so = project_scores(panel_obs, basis).select(ids);
  Eigen::MatrixXd xa = sa.stacked_covariates();
  Eigen::MatrixXd xo = so.stacked_covariates();
  if (center) {
    const Eigen::RowVectorXd mu = xo.colwise().mean();
    xa.rowwise() -= mu;
    xo.rowwise() -= mu;
  }
  const double n = static_cast<double>(ids.size());
  Eigen::MatrixXd pooled =
      gamma * (xa.transpose() * xa) / n + (1.0 - gamma) * (xo.transpose() * xo) / n;
  pooled = 0.5 * (pooled + pooled.transpose());
  return eigendecompose_matrix(pooled);
}

BetaKernel eigenbasis_estimator(const CurvePanel& panel_shifted, const CurvePanel& panel_obs,
                          const SplitPlan& split, const EstimatorConfig& cfg,
                          const BasisSet& basis) {
  return eigenbasis_impl(panel_shifted, panel_obs, split, cfg, basis, false);
}

BetaKernel eigenbasis_estimator_centered(const CurvePanel& panel_shifted, const CurvePanel& panel_obs,
                            const SplitPlan& split, const EstimatorConfig& cfg,
                            const BasisSet& basis) {
  return eigenbasis_impl(panel_shifted, panel_obs, split, cfg, basis, true);
}

BetaKernel fixed_basis_estimator(const CurvePanel& panel_shifted, const CurvePanel& panel_obs,
                          const SplitPlan& split, const EstimatorConfig& cfg,
                          const BasisSet& basis) {
  const PanelPair panels{panel_shifted, panel_obs};
  panels.check();
  split.validate(panels.shifted.size());
  const std::vector<std::size_t>& denom_ids =
      cfg.reuse_splits ? split.numerator : split.denominator;

  const int p = panels.shifted.covariate_count();
  const int N = basis.size();
  const auto schedules = resolve_schedules(cfg, panels, split.numerator.size(), N, N);
  const int e = std::min(schedules.e_target, schedules.e_direction);
  BasisPtr basis_ptr = std::make_shared<const BasisSet>(basis);
  if (e <= 0) return BetaKernel::zero(basis_ptr, p, N, N);

  const TimeGrid& grid = *panels.shifted.grid();
  const Eigen::MatrixXd wtab = grid.quad_weights().asDiagonal() * basis.tabulate(grid);

  auto restrict = [&](const Eigen::VectorXd& stacked) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(p) * e);
    for (int j = 0; j < p; ++j)
      out.segment(static_cast<Eigen::Index>(j) * e, e) =
          stacked.segment(static_cast<Eigen::Index>(j) * N, e);
    return out;
  };

  const double g = cfg.gamma;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p) * e, e);
  for (std::size_t m : split.numerator) {
    const auto s = stepped_scores(panels, m, schedules.mesh, wtab, false);
    rhs += g * restrict(s.x_shifted) * s.y_shifted.head(e).transpose() +
           (1.0 - g) * restrict(s.x_obs) * s.y_obs.head(e).transpose();
  }
  rhs /= static_cast<double>(split.numerator.size());

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p) * e,
                                               static_cast<Eigen::Index>(p) * e);
  for (std::size_t m : denom_ids) {
    const auto s = stepped_scores(panels, m, schedules.mesh, wtab, true);
    const Eigen::VectorXd fa = restrict(s.x_shifted);
    const Eigen::VectorXd fo = restrict(s.x_obs);
    gram += g * fa * fa.transpose() + (1.0 - g) * fo * fo.transpose();
  }
  gram /= static_cast<double>(denom_ids.size());
  gram = 0.5 * (gram + gram.transpose());

  GramSystem system;
  system.gram = std::move(gram);
  system.rhs = rhs.transpose();
  system.gamma = g;
  const BetaKernel truncated =
      gram_minimizer(system, basis_ptr, p, SingularPolicy::Error).beta;
  return truncated.embedded(N, N);
}

}  // namespace worstrisk
