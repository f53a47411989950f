#include <doctest.h>

#include "test_support.hpp"

using namespace worstrisk;
using testsup::ChainMoments;

TEST_SUITE_BEGIN("sem-sim");

TEST_CASE("spec validation") {
  const int N = 3;
  const auto d = 3 * N;
  CHECK_THROWS_AS(make_sem_spec(2, N, Eigen::MatrixXd::Identity(d, d),
                                Eigen::MatrixXd::Identity(d, d)),
                  SingularSystem);
  Eigen::MatrixXd bad_cov = Eigen::MatrixXd::Identity(d, d);
  bad_cov(0, 0) = -1.0;
  CHECK_THROWS_AS(make_sem_spec(2, N, Eigen::MatrixXd::Zero(d, d), bad_cov), DomainError);
  const SemSpec ok = chain_preset(N);
  CHECK(ok.solve_condition > 1.0);
  CHECK(ok.solve_condition < 1e3);
}

TEST_CASE("shift spec keeps unaffected blocks at zero") {
  const int N = 2;
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(3 * N);
  mu[0] = 0.5;  // target block must stay zero for a covariate-only shift
  CHECK_THROWS_AS(make_shift_spec(2, N, mu, Eigen::MatrixXd::Zero(3 * N, 3 * N), {1, 2}),
                  DomainError);
  const ShiftSpec s = chain_shift(N);
  CHECK(s.second_moment().topLeftCorner(N, N).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("B = 0 returns the noise draws") {
  const int N = 4;
  const auto d = 3 * N;
  const SemSpec spec =
      make_sem_spec(2, N, Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXd::Identity(d, d));
  const SemDraws draws = solve_sem_draws(spec, std::nullopt, 10, 5);
  CHECK((draws.scores.stacked_all() - draws.noise).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(draws.shift.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("triangular systems match manual forward substitution") {
  const int N = 2;
  const auto d = 3 * N;
  Rng rng(41);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < i; ++j) b(i, j) = 0.3 * rng.normal();
  const SemSpec spec = make_sem_spec(2, N, b, Eigen::MatrixXd::Identity(d, d));
  const SemDraws draws = solve_sem_draws(spec, std::nullopt, 6, 8);
  for (Eigen::Index m = 0; m < 6; ++m) {
    const Eigen::VectorXd eps = draws.noise.row(m).transpose();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i < d; ++i)
      x[i] = eps[i] + b.row(i).head(i).dot(x.head(i));
    CHECK((draws.scores.stacked_all().row(m).transpose() - x).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("chain preset matches the hand-derived moments") {
  testsup::ChainFixture fx;
  const std::size_t n = 200000;

  SUBCASE("observational second moments within 3 SE") {
    const ScorePanel sc = solve_sem(fx.spec, std::nullopt, n, 2024);
    const struct {
      const Eigen::MatrixXd *a, *b;
      double expected;
    } cases[] = {
        {&sc.target, &sc.target, ChainMoments::zz_o},
        {&sc.target, &sc.covariates[0], ChainMoments::zx1_o},
        {&sc.target, &sc.covariates[1], ChainMoments::zx2_o},
        {&sc.covariates[0], &sc.covariates[0], ChainMoments::x11_o},
        {&sc.covariates[0], &sc.covariates[1], ChainMoments::x12_o},
        {&sc.covariates[1], &sc.covariates[1], ChainMoments::x22_o},
    };
    for (const auto& c : cases) {
      const auto est = testsup::product_moment(*c.a, *c.b);
      CHECK(std::abs(est.value - c.expected) <= 3.0 * est.se);
    }
  }
  SUBCASE("shifted second moments within 3 SE") {
    const ScorePanel sc = solve_sem(fx.spec, fx.shift, n, 2025);
    const struct {
      const Eigen::MatrixXd *a, *b;
      double expected;
    } cases[] = {
        {&sc.target, &sc.target, ChainMoments::zz_a},
        {&sc.target, &sc.covariates[0], ChainMoments::zx1_a},
        {&sc.target, &sc.covariates[1], ChainMoments::zx2_a},
        {&sc.covariates[0], &sc.covariates[0], ChainMoments::x11_a},
        {&sc.covariates[0], &sc.covariates[1], ChainMoments::x12_a},
        {&sc.covariates[1], &sc.covariates[1], ChainMoments::x22_a},
    };
    for (const auto& c : cases) {
      const auto est = testsup::product_moment(*c.a, *c.b);
      CHECK(std::abs(est.value - c.expected) <= 3.0 * est.se);
    }
  }
}

TEST_CASE("population second moment matches the hand chain algebra exactly") {
  testsup::ChainFixture fx;
  const SecondMoments o = fx.moments_obs();
  const SecondMoments a = fx.moments_shifted();
  const int N = 10;
  CHECK(o.target_sq[3] == doctest::Approx(ChainMoments::zz_o).epsilon(1e-12));
  CHECK(o.cross(3, 3) == doctest::Approx(ChainMoments::zx1_o).epsilon(1e-12));
  CHECK(o.cross(3, N + 3) == doctest::Approx(ChainMoments::zx2_o).epsilon(1e-12));
  CHECK(o.covariate(3, N + 3) == doctest::Approx(ChainMoments::x12_o).epsilon(1e-12));
  CHECK(a.target_sq[3] == doctest::Approx(ChainMoments::zz_a).epsilon(1e-12));
  CHECK(a.cross(3, 3) == doctest::Approx(ChainMoments::zx1_a).epsilon(1e-12));
  CHECK(a.cross(3, N + 3) == doctest::Approx(ChainMoments::zx2_a).epsilon(1e-12));
  CHECK(a.covariate(3, 3) == doctest::Approx(ChainMoments::x11_a).epsilon(1e-12));
  CHECK(a.covariate(3, N + 3) == doctest::Approx(ChainMoments::x12_a).epsilon(1e-12));
  CHECK(a.covariate(N + 3, N + 3) == doctest::Approx(ChainMoments::x22_a).epsilon(1e-12));
  // dimensions decouple: no cross-dimension coupling in the fixture
  CHECK(a.covariate(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("noise and shift streams are independent") {
  testsup::ChainFixture fx(2, 8);
  const SemDraws draws = solve_sem_draws(fx.spec, fx.shift, 1000000, 11);
  const Eigen::VectorXd eps = draws.noise.col(2);
  const Eigen::VectorXd alp = draws.shift.col(2);
  const double me = eps.mean(), ma = alp.mean();
  const double cov = (eps.array() - me).matrix().dot((alp.array() - ma).matrix()) /
                     static_cast<double>(eps.size());
  const double corr = cov / std::sqrt((eps.array() - me).square().mean() *
                                      (alp.array() - ma).square().mean());
  CHECK(std::abs(corr) < 0.01);
}

TEST_CASE("generation is deterministic and prefix-stable in n") {
  testsup::ChainFixture fx(2, 4);
  const ScorePanel a = solve_sem(fx.spec, fx.shift, 32, 77);
  const ScorePanel b = solve_sem(fx.spec, fx.shift, 32, 77);
  CHECK((a.stacked_all() - b.stacked_all()).cwiseAbs().maxCoeff() == 0.0);
  const ScorePanel prefix = solve_sem(fx.spec, fx.shift, 8, 77);
  CHECK((a.stacked_all().topRows(8) - prefix.stacked_all()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("render_curves") {
  const int N = 10;
  auto grid = make_uniform_grid(0.0, 1.0, 512);
  const auto basis = make_sine_basis(N);

  SUBCASE("zero scores give zero curves") {
    ScorePanel zero;
    zero.target = Eigen::MatrixXd::Zero(2, N);
    zero.covariates = {Eigen::MatrixXd::Zero(2, N), Eigen::MatrixXd::Zero(2, N)};
    const CurvePanel panel = render_curves(zero, *basis, grid, "z");
    CHECK(panel.target().cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("a unit score reproduces the tabulated basis function") {
    ScorePanel unit;
    unit.target = Eigen::MatrixXd::Zero(1, N);
    unit.target(0, 0) = 1.0;
    unit.covariates = {Eigen::MatrixXd::Zero(1, N)};
    const CurvePanel panel = render_curves(unit, *basis, grid, "u");
    const Eigen::MatrixXd tab = basis->tabulate(*grid);
    CHECK((panel.target().row(0).transpose() - tab.col(0)).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("render then project is the identity within quadrature error") {
    testsup::ChainFixture fx(N, 512);
    const ScorePanel scores = solve_sem(fx.spec, std::nullopt, 50, 4);
    const ScorePanel back =
        project_scores(render_curves(scores, *fx.basis, grid, "r"), *fx.basis);
    CHECK((back.target - scores.target).cwiseAbs().maxCoeff() < 1e-2);
    for (int j = 0; j < 2; ++j)
      CHECK((back.covariates[j] - scores.covariates[j]).cwiseAbs().maxCoeff() < 1e-2);
  }
  SUBCASE("dimension mismatch is rejected") {
    ScorePanel bad;
    bad.target = Eigen::MatrixXd::Zero(1, N + 1);
    bad.covariates = {Eigen::MatrixXd::Zero(1, N + 1)};
    CHECK_THROWS_AS(render_curves(bad, *basis, grid, "b"), DimensionMismatch);
  }
}

TEST_CASE("apply_multiplicative") {
  auto grid = make_uniform_grid(0.0, 1.0, 101);
  Eigen::VectorXd values(101);
  for (int i = 0; i < 101; ++i) values[i] = 1.0 + 0.2 * std::sin(3.0 * i);
  const CurveSystem sys(SampledCurve(grid, values), {SampledCurve(grid, values)});

  SUBCASE("zero multiplier is the identity") {
    const auto out = apply_multiplicative(
        {Eigen::VectorXd::Zero(101), Eigen::VectorXd::Zero(101)}, sys);
    CHECK((out.target.values - values).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("constant one-half doubles the channel") {
    const auto out = apply_multiplicative(
        {Eigen::VectorXd::Constant(101, 0.5), Eigen::VectorXd::Zero(101)}, sys);
    CHECK((out.target.values - 2.0 * values).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((out.covariates[0].values - values).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("g(t) = t/2 scales by 1/(1 - t/2)") {
    Eigen::VectorXd g(101);
    for (int i = 0; i < 101; ++i) g[i] = grid->points()[i] / 2.0;
    const auto out = apply_multiplicative({g, Eigen::VectorXd::Zero(101)}, sys);
    CHECK(out.target.values[50] == doctest::Approx(values[50] * 4.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("multiplier near one is rejected") {
    CHECK_THROWS_AS(apply_multiplicative(
                        {Eigen::VectorXd::Ones(101), Eigen::VectorXd::Zero(101)}, sys),
                    NearSingularMultiplier);
  }
}

TEST_CASE("multiplicative systems are realized through the rendered path") {
  const int N = 4;
  const auto d = static_cast<Eigen::Index>(2 * N);
  auto grid = make_uniform_grid(0.0, 1.0, 101);
  SemSpec spec = make_sem_spec(1, N, Eigen::MatrixXd::Zero(d, d),
                               Eigen::MatrixXd::Identity(d, d), OperatorKind::Multiplicative);
  spec.multiplier_grid = grid;
  spec.multipliers = {Eigen::VectorXd::Constant(101, 0.5), Eigen::VectorXd::Zero(101)};

  // the score-space solve only covers score-linear systems
  CHECK_THROWS_AS(solve_sem(spec, std::nullopt, 4, 1), DomainError);

  // pipeline: draw the driving noise with B = 0, render, then multiply
  SemSpec driver = spec;
  driver.kind = OperatorKind::ScoreLinear;
  const auto basis = make_sine_basis(N);
  const CurvePanel noise =
      render_curves(solve_sem(driver, std::nullopt, 3, 1), *basis, grid, "noise");
  const CurveSystem out = apply_multiplicative(spec.multipliers, noise.system(0));
  CHECK((out.target.values - 2.0 * noise.system(0).target.values).cwiseAbs().maxCoeff() <
        1e-13);
}

TEST_SUITE_END();
