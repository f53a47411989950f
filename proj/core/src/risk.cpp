#include "worstrisk/risk.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "worstrisk/rng.hpp"
#include "worstrisk/shift_set.hpp"

namespace worstrisk {

SecondMoments SecondMoments::from_joint(const Eigen::MatrixXd& joint, int covariates,
                                        int n_basis) {
  const auto d = static_cast<Eigen::Index>(covariates + 1) * n_basis;
  if (joint.rows() != d || joint.cols() != d)
    throw DimensionMismatch("joint moment matrix must be (p+1)N x (p+1)N");
  SecondMoments m;
  m.target_sq = joint.topLeftCorner(n_basis, n_basis).diagonal();
  m.cross = joint.topRightCorner(n_basis, d - n_basis);
  m.covariate = joint.bottomRightCorner(d - n_basis, d - n_basis);
  return m;
}

SecondMoments SecondMoments::from_scores(const ScorePanel& scores) {
  if (scores.rows() == 0) throw EmptyPanel("moments need at least one realization");
  const double n = static_cast<double>(scores.rows());
  const Eigen::MatrixXd x = scores.stacked_covariates();
  SecondMoments m;
  m.target_sq = scores.target.colwise().squaredNorm().transpose() / n;
  m.cross = scores.target.transpose() * x / n;
  m.covariate = x.transpose() * x / n;
  m.covariate = 0.5 * (m.covariate + m.covariate.transpose());
  return m;
}

SecondMoments SecondMoments::rotated(const EigenSystem& eig) const {
  if (eig.vectors.rows() != covariate.rows())
    throw DimensionMismatch("eigenvector dimension must match the covariate block");
  SecondMoments m;
  m.target_sq = target_sq;
  m.cross = cross * eig.vectors;
  m.covariate = eig.vectors.transpose() * covariate * eig.vectors;
  m.covariate = 0.5 * (m.covariate + m.covariate.transpose());
  return m;
}

SecondMoments population_moments(const SemSpec& spec, const Eigen::MatrixXd* shift_second) {
  return SecondMoments::from_joint(population_second_moment(spec, shift_second),
                                   spec.covariates, spec.n_basis);
}

double risk_closed_form(const Eigen::MatrixXd& lambda, const SecondMoments& moments) {
  if (lambda.rows() != moments.target_sq.size() || lambda.cols() != moments.cross.cols() ||
      lambda.cols() != moments.covariate.rows())
    throw DimensionMismatch("lambda shape must match the moment truncation");
  const double quad = (lambda * moments.covariate).cwiseProduct(lambda).sum();
  return moments.target_sq.sum() - 2.0 * lambda.cwiseProduct(moments.cross).sum() + quad;
}

double risk_closed_form(const BetaKernel& beta, const SecondMoments& moments) {
  return risk_closed_form(beta.stacked(), moments);
}

RiskMcResult risk_mc_detailed(const BetaKernel& beta, const CurvePanel& panel,
                              const BasisSet& basis) {
  if (beta.covariates() != panel.covariate_count())
    throw DimensionMismatch("kernel and panel covariate counts differ");
  if (beta.row_basis()->size() < beta.target_size() ||
      basis.size() != beta.row_basis()->size())
    throw DimensionMismatch("risk_mc basis must match the kernel's row basis");
  const TimeGrid& grid = *panel.grid();
  const Eigen::MatrixXd tab = basis.tabulate(grid);            // m x N
  const Eigen::MatrixXd wtab = grid.quad_weights().asDiagonal() * tab;
  const Eigen::MatrixXd lambda =
      beta.embedded(basis.size(), basis.size()).stacked();     // N x pN

  const std::size_t n = panel.size();
  if (n == 0) throw EmptyPanel("risk_mc needs at least one realization");
  double sum = 0.0, sum_sq = 0.0;
  constexpr std::size_t kChunk = 4096;
  for (std::size_t start = 0; start < n; start += kChunk) {
    const auto len = static_cast<Eigen::Index>(std::min(kChunk, n - start));
    // covariate quadrature scores of the chunk, stacked (len x pN)
    Eigen::MatrixXd xscores(len, lambda.cols());
    for (int j = 0; j < panel.covariate_count(); ++j)
      xscores.middleCols(static_cast<Eigen::Index>(j) * basis.size(), basis.size()) =
          panel.covariate(j).middleRows(static_cast<Eigen::Index>(start), len) * wtab;
    // fitted curves sum_k phi_k(t) (lambda * s)_k and pointwise residuals
    const Eigen::MatrixXd fitted = xscores * lambda.transpose() * tab.transpose();  // len x m
    const Eigen::MatrixXd resid =
        panel.target().middleRows(static_cast<Eigen::Index>(start), len) - fitted;
    const Eigen::VectorXd risks = resid.cwiseProduct(resid) * grid.quad_weights();
    sum += risks.sum();
    sum_sq += risks.squaredNorm();
  }
  RiskMcResult out;
  out.n = n;
  out.mean = sum / static_cast<double>(n);
  const double var =
      std::max(0.0, sum_sq / static_cast<double>(n) - out.mean * out.mean);
  out.std_error = std::sqrt(var / static_cast<double>(n));
  return out;
}

double risk_mc(const BetaKernel& beta, const CurvePanel& panel, const BasisSet& basis) {
  return risk_mc_detailed(beta, panel, basis).mean;
}

double worst_risk(double r_shift, double r_obs, double gamma) {
  if (!(gamma > 0.0)) throw InvalidGamma("worst_risk requires gamma > 0");
  if (!std::isfinite(r_shift) || !std::isfinite(r_obs))
    throw DomainError("worst_risk inputs must be finite");
  return 0.5 * (r_shift + r_obs) + (gamma - 0.5) * (r_shift - r_obs);
}

RiskReport make_risk_report(double r_shift, double r_obs, double gamma) {
  RiskReport rep;
  rep.r_obs = r_obs;
  rep.r_shift = r_shift;
  rep.r_pooled = r_obs + r_shift;
  rep.r_delta = r_shift - r_obs;
  rep.gamma = gamma;
  rep.worst = worst_risk(r_shift, r_obs, gamma);
  return rep;
}

namespace {

// Random PSD candidate dominated by `bound`: factor the bound on its range,
// draw a Wishart-type matrix there and clip its spectrum to [0, 1].
Eigen::MatrixXd dominated_candidate(const Eigen::MatrixXd& bound_factor, Rng& rng) {
  const auto r = bound_factor.cols();
  Eigen::MatrixXd w(r, r);
  for (Eigen::Index i = 0; i < r; ++i) w.col(i) = rng.normal_vector(r);
  Eigen::MatrixXd wish = w * w.transpose() / static_cast<double>(r);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(wish);
  const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0).cwiseMin(1.0);
  const Eigen::MatrixXd inner =
      es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
  Eigen::MatrixXd out = bound_factor * inner * bound_factor.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace

DecompositionReport verify_decomposition(const SemSpec& spec, const ShiftSpec& shift,
                                         const BetaKernel& beta, double gamma,
                                         std::size_t mc_check_n, std::size_t n_candidates,
                                         std::uint64_t seed, double tol) {
  if (!(gamma > 0.0)) throw InvalidGamma("verify_decomposition requires gamma > 0");
  if (n_candidates < 1) throw DegenerateFamily("verify_decomposition needs candidates");

  const Eigen::MatrixXd shift_moment = shift.second_moment();
  const Eigen::MatrixXd lambda = beta.embedded(spec.n_basis, spec.n_basis).stacked();

  DecompositionReport rep;
  rep.gamma = gamma;
  rep.tol = tol;
  rep.r_obs = risk_closed_form(lambda, population_moments(spec, nullptr));
  rep.r_shift = risk_closed_form(lambda, population_moments(spec, &shift_moment));
  rep.decomposition = worst_risk(rep.r_shift, rep.r_obs, gamma);

  // dominance bound gamma * K_A, factored on its numerical range
  const Eigen::MatrixXd bound = gamma * shift_moment;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bound);
  const double max_eig = es.eigenvalues().cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> range;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] > 1e-12 * std::max(max_eig, 1e-300)) range.push_back(i);
  Eigen::MatrixXd bound_factor(bound.rows(), static_cast<Eigen::Index>(range.size()));
  for (std::size_t j = 0; j < range.size(); ++j)
    bound_factor.col(static_cast<Eigen::Index>(j)) =
        es.eigenvectors().col(range[j]) * std::sqrt(es.eigenvalues()[range[j]]);

  rep.max_candidate_risk = -std::numeric_limits<double>::infinity();
  std::size_t admissible_count = 0;
  for (std::size_t c = 0; c < n_candidates; ++c) {
    DecompositionCandidate cand;
    cand.id = static_cast<int>(c);
    Eigen::MatrixXd cand_moment;
    if (c == 0) {
      cand.is_scaled_shift = true;  // the sqrt(gamma)-scaled observed shift
      cand_moment = bound;
    } else if (range.empty()) {
      cand_moment = Eigen::MatrixXd::Zero(bound.rows(), bound.cols());
    } else {
      Rng rng = Rng::substream(seed, c, 7);
      cand_moment = dominated_candidate(bound_factor, rng);
    }
    cand.admissible = finite_basis_psd_check(cand_moment, shift_moment, gamma, 1e-9);
    cand.risk = risk_closed_form(lambda, population_moments(spec, &cand_moment));
    if (cand.admissible) {
      ++admissible_count;
      rep.max_candidate_risk = std::max(rep.max_candidate_risk, cand.risk);
    }
    if (cand.is_scaled_shift) rep.scaled_shift_risk = cand.risk;
    rep.candidates.push_back(std::move(cand));
  }
  if (admissible_count == 0) throw DegenerateFamily("no admissible candidate was generated");

  rep.pass = rep.max_candidate_risk <= rep.decomposition + tol &&
             std::abs(rep.scaled_shift_risk - rep.decomposition) <= tol;

  if (mc_check_n > 0) {
    auto grid = make_uniform_grid(beta.row_basis()->t_start(), beta.row_basis()->t_end(), 100);
    const auto obs = risk_mc_detailed(
        beta, render_curves(solve_sem(spec, std::nullopt, mc_check_n, seed ^ 0x5bd1e995ULL),
                            *beta.row_basis(), grid, "observational"),
        *beta.row_basis());
    const auto shf = risk_mc_detailed(
        beta, render_curves(solve_sem(spec, shift, mc_check_n, seed ^ 0x27d4eb2fULL),
                            *beta.row_basis(), grid, "shifted"),
        *beta.row_basis());
    rep.mc_r_obs = obs.mean;
    rep.mc_r_obs_se = obs.std_error;
    rep.mc_r_shift = shf.mean;
    rep.mc_r_shift_se = shf.std_error;
    rep.pass = rep.pass && std::abs(rep.mc_r_obs - rep.r_obs) <= 3.0 * obs.std_error &&
               std::abs(rep.mc_r_shift - rep.r_shift) <= 3.0 * shf.std_error;
  }
  return rep;
}

ContinuityReport risk_continuity_probe(const SemSpec& spec, const BetaKernel& beta,
                                       const std::vector<Eigen::MatrixXd>& shift_moment_sequence,
                                       const Eigen::MatrixXd& limit_moment,
                                       const std::vector<double>& distances) {
  if (shift_moment_sequence.size() != distances.size())
    throw DimensionMismatch("one distance per sequence element");
  const Eigen::MatrixXd lambda = beta.embedded(spec.n_basis, spec.n_basis).stacked();
  const double limit_risk = risk_closed_form(lambda, population_moments(spec, &limit_moment));

  ContinuityReport rep;
  rep.distances = distances;
  for (const auto& m : shift_moment_sequence) {
    const double r = risk_closed_form(lambda, population_moments(spec, &m));
    rep.gaps.push_back(std::abs(r - limit_risk));
  }
  // fit the envelope at the farthest point; closer points must stay under it
  double c = 0.0;
  for (std::size_t i = 0; i < rep.gaps.size(); ++i)
    if (distances[i] > 0.0) {
      c = rep.gaps[i] / distances[i];
      break;
    }
  rep.envelope_constant = c;
  rep.pass = true;
  constexpr double kAbsTol = 1e-10;
  for (std::size_t i = 0; i < rep.gaps.size(); ++i) {
    if (distances[i] <= 0.0) {
      if (rep.gaps[i] > kAbsTol) rep.pass = false;
    } else if (rep.gaps[i] > c * distances[i] + kAbsTol) {
      rep.pass = false;
    }
  }
  if (!rep.gaps.empty() && rep.gaps.back() > rep.gaps.front() + kAbsTol) rep.pass = false;
  return rep;
}

}  // namespace worstrisk
