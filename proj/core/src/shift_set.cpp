#include "worstrisk/shift_set.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>

namespace worstrisk {

namespace {

// Basis coefficients of a scalar function sampled on a dense grid.
Eigen::VectorXd project_dense(const BasisSet& basis,
                              const std::function<double(double)>& f) {
  constexpr std::size_t kDense = 4096;
  const TimeGrid grid = TimeGrid::uniform(basis.t_start(), basis.t_end(), kDense + 1);
  Eigen::VectorXd fv(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i)
    fv[static_cast<Eigen::Index>(i)] = f(grid[i]);
  return quad_project(grid, fv, basis.tabulate(grid));
}

void push_per_channel(std::vector<TestFunction>& out, const std::string& kind,
                      const Eigen::VectorXd& scalar_coeffs, int channels, int n_basis) {
  if (scalar_coeffs.norm() < 1e-12) return;
  const Eigen::VectorXd unit = scalar_coeffs / scalar_coeffs.norm();
  for (int c = 0; c < channels; ++c) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(channels) * n_basis);
    v.segment(static_cast<Eigen::Index>(c) * n_basis, n_basis) = unit;
    out.push_back({kind, std::move(v)});
  }
}

}  // namespace

MercerResult mercer_check(const CovOperator& candidate, const CovOperator& reference,
                          double gamma, const TestFamilySpec& family, double tol) {
  if (!(gamma > 0.0)) throw InvalidGamma("mercer_check requires gamma > 0");
  if (candidate.dim() != reference.dim() || candidate.channels != reference.channels)
    throw DimensionMismatch("mercer_check operands must share shape");
  const int d = candidate.channels;
  const int N = candidate.n_basis;
  if (family.basis && family.basis->size() != N)
    throw DimensionMismatch("test family basis must match the operator coordinates");
  const Eigen::MatrixXd diff = gamma * reference.mat - candidate.mat;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(diff);
  const double spectral = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);

  std::vector<TestFunction> tests;
  // the basis functions themselves, one channel at a time
  for (int c = 0; c < d; ++c) {
    for (int k = 0; k < N; ++k) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(diff.rows());
      v[static_cast<Eigen::Index>(c) * N + k] = 1.0;
      tests.push_back({"basis", std::move(v)});
    }
  }
  if (family.include_pairs) {
    for (int ci = 0; ci < d; ++ci)
      for (int cj = ci + 1; cj < d; ++cj)
        for (int k = 0; k < N; ++k)
          for (int l = 0; l < N; ++l)
            for (double sign : {1.0, -1.0}) {
              Eigen::VectorXd v = Eigen::VectorXd::Zero(diff.rows());
              v[static_cast<Eigen::Index>(ci) * N + k] = M_SQRT1_2;
              v[static_cast<Eigen::Index>(cj) * N + l] = sign * M_SQRT1_2;
              tests.push_back({"pair", std::move(v)});
            }
  }
  if (family.basis) {
    const BasisSet& b = *family.basis;
    const double t1 = b.t_start();
    const double span = b.t_end() - t1;
    for (int depth = 1; depth <= family.dyadic_depth; ++depth) {
      const int cells = 1 << depth;
      for (int m = 0; m < cells; ++m) {
        const double a = t1 + span * static_cast<double>(m) / cells;
        const double e = t1 + span * static_cast<double>(m + 1) / cells;
        push_per_channel(tests, "step",
                         project_dense(b, [a, e](double t) { return (t >= a && t < e) ? 1.0 : 0.0; }),
                         d, N);
      }
    }
    for (int deg = 0; deg <= family.monomial_degree; ++deg)
      push_per_channel(tests, "monomial",
                       project_dense(b, [deg](double t) { return std::pow(t, deg); }), d, N);
  }
  if (family.include_eigen_directions) {
    for (Eigen::Index c = 0; c < diff.cols(); ++c)
      tests.push_back({"eigen", es.eigenvectors().col(c)});
  }

  MercerResult result;
  result.tests_evaluated = tests.size();
  result.min_form = std::numeric_limits<double>::infinity();
  const TestFunction* worst = nullptr;
  for (const auto& t : tests) {
    const double form = t.coeffs.dot(diff * t.coeffs) / spectral;
    if (form < result.min_form) {
      result.min_form = form;
      worst = &t;
    }
  }
  if (result.min_form < -tol && worst) {
    result.member = false;
    result.witness = MercerWitness{*worst, result.min_form};
  }
  return result;
}

bool finite_basis_psd_check(const Eigen::MatrixXd& candidate, const Eigen::MatrixXd& reference,
                            double gamma, double tol) {
  if (candidate.rows() != candidate.cols() || reference.rows() != reference.cols() ||
      candidate.rows() != reference.rows())
    throw DimensionMismatch("finite_basis_psd_check needs square matrices of equal size");
  const double scale = std::max(1.0, std::max(candidate.cwiseAbs().maxCoeff(),
                                              reference.cwiseAbs().maxCoeff()));
  if ((candidate - candidate.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale ||
      (reference - reference.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw NotSymmetric("finite_basis_psd_check needs symmetric matrices");
  const Eigen::MatrixXd diff = gamma * reference - candidate;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(diff, Eigen::EigenvaluesOnly);
  const double spectral = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  return es.eigenvalues().minCoeff() >= -tol * spectral;
}

void LagCov::validate() const {
  const auto n = lags.size();
  if (n < 1 || static_cast<std::size_t>(n) != value.size())
    throw DimensionMismatch("LagCov needs one matrix per lag");
  const auto d = value.front().rows();
  for (const auto& m : value)
    if (m.rows() != d || m.cols() != d)
      throw DimensionMismatch("LagCov matrices must be square and equally sized");
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    if (!(lags[i] < lags[i + 1])) throw DomainError("LagCov lags must be ascending");
  const double step = n > 1 ? lags[1] - lags[0] : 1.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    if (std::abs((lags[i + 1] - lags[i]) - step) > 1e-9 * std::abs(step))
      throw DomainError("LagCov lag grid must be uniformly spaced");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(lags[i] + lags[n - 1 - i]) > 1e-9 * std::max(1.0, std::abs(step)))
      throw DomainError("LagCov lag grid must be symmetric around zero");
    const Eigen::MatrixXd dev =
        value[static_cast<std::size_t>(i)] -
        value[static_cast<std::size_t>(n - 1 - i)].transpose();
    const double scale = std::max(1.0, value[static_cast<std::size_t>(i)].cwiseAbs().maxCoeff());
    if (dev.cwiseAbs().maxCoeff() > 1e-9 * scale)
      throw NotSymmetric("LagCov must satisfy k(-h) = k(h)^t");
  }
}

LagCov scale_lagcov(const LagCov& k, double factor) {
  LagCov out = k;
  for (auto& m : out.value) m *= factor;
  return out;
}

WssResult wss_fft_check(const LagCov& candidate, const LagCov& reference, double gamma,
                        double freq_tol) {
  if (!(gamma > 0.0)) throw InvalidGamma("wss_fft_check requires gamma > 0");
  candidate.validate();
  reference.validate();
  if (candidate.lags.size() != reference.lags.size() ||
      (candidate.lags - reference.lags).cwiseAbs().maxCoeff() > 1e-12)
    throw DomainError("wss_fft_check needs a shared lag grid");
  if (candidate.channels() != reference.channels())
    throw DimensionMismatch("wss_fft_check needs matching channel counts");

  const auto n_lags = candidate.lags.size();
  const auto d = candidate.channels();
  const double step = n_lags > 1 ? candidate.lags[1] - candidate.lags[0] : 1.0;
  std::vector<Eigen::MatrixXd> diff(static_cast<std::size_t>(n_lags));
  for (Eigen::Index i = 0; i < n_lags; ++i)
    diff[static_cast<std::size_t>(i)] = gamma * reference.value[static_cast<std::size_t>(i)] -
                                        candidate.value[static_cast<std::size_t>(i)];

  // zero-padded transform length (power of two, at least 4x the lag count)
  std::size_t nf = 256;
  while (nf < static_cast<std::size_t>(4 * n_lags)) nf *= 2;

  WssResult result;
  result.min_eig = std::numeric_limits<double>::infinity();
  double max_norm = 1e-300;
  std::vector<double> min_eigs(nf);
  const std::complex<double> I(0.0, 1.0);
  for (std::size_t j = 0; j < nf; ++j) {
    Eigen::MatrixXcd hat = Eigen::MatrixXcd::Zero(d, d);
    const double theta = -2.0 * M_PI * static_cast<double>(j) / static_cast<double>(nf);
    for (Eigen::Index l = 0; l < n_lags; ++l) {
      // lag index offset so h = (l - mid) * step
      const double phase = theta * static_cast<double>(l - n_lags / 2);
      hat += diff[static_cast<std::size_t>(l)] * std::exp(I * phase);
    }
    const Eigen::MatrixXcd herm = 0.5 * (hat + hat.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    min_eigs[j] = es.eigenvalues().minCoeff();
    max_norm = std::max(max_norm, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  for (std::size_t j = 0; j < nf; ++j) {
    const double rel = min_eigs[j] / max_norm;
    if (rel < result.min_eig) {
      result.min_eig = rel;
      result.witness_bin = static_cast<int>(j);
      result.witness_freq = 2.0 * M_PI * static_cast<double>(j) /
                            (static_cast<double>(nf) * step);
    }
  }
  result.member = result.min_eig >= -freq_tol;
  if (result.member) {
    result.witness_bin = -1;
    result.witness_freq = 0.0;
  }
  return result;
}

}  // namespace worstrisk
