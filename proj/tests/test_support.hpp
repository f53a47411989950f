#pragma once

// Shared fixtures and independent reference computations for the test suites.
// Everything here is deliberately written on a different route than the
// library code it checks: closed-form 2x2 algebra, dense quadrature, direct
// transforms.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "worstrisk/estimation.hpp"
#include "worstrisk/io.hpp"
#include "worstrisk/risk.hpp"
#include "worstrisk/rng.hpp"
#include "worstrisk/shift_set.hpp"

namespace testsup {

using namespace worstrisk;

// ---------------------------------------------------------------------------
// Hand-derived second moments of the three-variable chain with unit effects,
// standard normal noise and the (mean 0.1, sd 0.1) covariate shift. One basis
// dimension; dimensions are iid copies.
struct ChainMoments {
  // observational
  static constexpr double zz_o = 2.0;
  static constexpr double zx1_o = 1.0;
  static constexpr double zx2_o = 2.0;
  static constexpr double x11_o = 1.0;
  static constexpr double x12_o = 1.0;
  static constexpr double x22_o = 3.0;
  // shifted
  static constexpr double zz_a = 2.02;
  static constexpr double zx1_a = 1.02;
  static constexpr double zx2_a = 2.03;
  static constexpr double x11_a = 1.02;
  static constexpr double x12_a = 1.03;
  static constexpr double x22_a = 3.06;

  static Eigen::Matrix2d gram(double gamma) {
    Eigen::Matrix2d a, o;
    a << x11_a, x12_a, x12_a, x22_a;
    o << x11_o, x12_o, x12_o, x22_o;
    return gamma * a + (1.0 - gamma) * o;
  }
  static Eigen::Vector2d rhs(double gamma) {
    return gamma * Eigen::Vector2d(zx1_a, zx2_a) + (1.0 - gamma) * Eigen::Vector2d(zx1_o, zx2_o);
  }
};

// Cramer solve of a 2x2 system.
inline Eigen::Vector2d solve2x2(const Eigen::Matrix2d& m, const Eigen::Vector2d& b) {
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return Eigen::Vector2d((b[0] * m(1, 1) - b[1] * m(0, 1)) / det,
                         (m(0, 0) * b[1] - m(1, 0) * b[0]) / det);
}

// Quadratic-formula eigenvalues of a symmetric 2x2 matrix, descending.
inline Eigen::Vector2d eig2x2(const Eigen::Matrix2d& m) {
  const double tr = m(0, 0) + m(1, 1);
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double disc = std::sqrt(tr * tr / 4.0 - det);
  return Eigen::Vector2d(tr / 2.0 + disc, tr / 2.0 - disc);
}

// Per-dim worst-risk coefficients from the hand moments.
inline Eigen::Vector2d chain_coefficients(double gamma) {
  return solve2x2(ChainMoments::gram(gamma), ChainMoments::rhs(gamma));
}

// ---------------------------------------------------------------------------
struct ChainFixture {
  SemSpec spec;
  ShiftSpec shift;
  BasisPtr basis;
  GridPtr grid;

  explicit ChainFixture(int n_basis = 10, std::size_t n_grid = 100)
      : spec(chain_preset(n_basis)),
        shift(chain_shift(n_basis)),
        basis(make_sine_basis(n_basis)),
        grid(make_uniform_grid(0.0, 1.0, n_grid)) {}

  CurvePanel shifted_panel(std::size_t n, std::uint64_t seed) const {
    return render_curves(solve_sem(spec, shift, n, seed), *basis, grid, "shifted");
  }
  CurvePanel observational_panel(std::size_t n, std::uint64_t seed) const {
    return render_curves(solve_sem(spec, std::nullopt, n, seed), *basis, grid, "observational");
  }
  SecondMoments moments_shifted() const {
    const Eigen::MatrixXd sm = shift.second_moment();
    return population_moments(spec, &sm);
  }
  SecondMoments moments_obs() const { return population_moments(spec, nullptr); }

  BetaKernel population_kernel(double gamma) const {
    const SecondMoments a = moments_shifted();
    const SecondMoments o = moments_obs();
    GramSystem gram;
    gram.gram = gamma * a.covariate + (1.0 - gamma) * o.covariate;
    gram.gram = 0.5 * (gram.gram + gram.gram.transpose());
    gram.rhs = gamma * a.cross + (1.0 - gamma) * o.cross;
    gram.gamma = gamma;
    return gram_minimizer(gram, basis, spec.covariates).beta;
  }
};

inline BetaKernel random_kernel(const BasisPtr& basis, int covariates, int n_basis,
                                std::uint64_t seed, double scale = 0.4) {
  Rng rng = Rng::substream(seed, 0, 3);
  std::vector<Eigen::MatrixXd> coeff;
  for (int j = 0; j < covariates; ++j) {
    Eigen::MatrixXd m(n_basis, n_basis);
    for (Eigen::Index r = 0; r < m.rows(); ++r) m.row(r) = rng.normal_vector(m.cols()).transpose();
    coeff.push_back(scale * m);
  }
  return BetaKernel(basis, std::move(coeff));
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

inline double quantile95(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(v.size()))) - 1;
  return v[std::min(idx, v.size() - 1)];
}

// Dim-averaged product moment of two score blocks plus the standard error of
// that average (products are iid across realizations and dimensions here).
struct MomentEstimate {
  double value = 0.0;
  double se = 0.0;
};

inline MomentEstimate product_moment(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::ArrayXXd prod = a.array() * b.array();
  MomentEstimate m;
  const double count = static_cast<double>(prod.size());
  m.value = prod.mean();
  m.se = std::sqrt((prod - m.value).square().sum() / count / count);
  return m;
}

}  // namespace testsup
