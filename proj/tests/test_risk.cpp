#include <doctest.h>

#include "test_support.hpp"

using namespace worstrisk;
using testsup::ChainMoments;

TEST_SUITE_BEGIN("risk");

TEST_CASE("worst_risk arithmetic") {
  CHECK(worst_risk(3.0, 1.0, 2.0) == doctest::Approx(5.0));
  CHECK(worst_risk(7.0, 7.0, 0.25) == doctest::Approx(7.0));
  CHECK(worst_risk(4.0, 2.0, 1.0) == doctest::Approx(4.0));
  CHECK(worst_risk(4.0, 2.0, 0.5) == doctest::Approx(3.0));
  CHECK_THROWS_AS(worst_risk(1.0, 1.0, 0.0), InvalidGamma);
  CHECK_THROWS_AS(worst_risk(1.0, 1.0, -2.0), InvalidGamma);
}

TEST_CASE("decomposition identities") {
  // worst(r, r, gamma) = r for any gamma, and affinity in gamma
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const double r = std::abs(rng.normal()) * 5.0;
    const double gamma = 0.05 + 4.0 * rng.uniform();
    CHECK(worst_risk(r, r, gamma) == doctest::Approx(r).epsilon(1e-12));
  }
  const double rs = 3.2, ro = 1.1;
  const double w1 = worst_risk(rs, ro, 1.0);
  const double w2 = worst_risk(rs, ro, 2.0);
  const double w3 = worst_risk(rs, ro, 3.0);
  CHECK(w3 - w2 == doctest::Approx(w2 - w1).epsilon(1e-12));  // affine in gamma
  CHECK(w2 > w1);                                             // increasing when rs > ro
  CHECK(worst_risk(1.0, 2.0, 3.0) < worst_risk(1.0, 2.0, 2.0));
  const RiskReport rep = make_risk_report(rs, ro, 2.0);
  CHECK(rep.r_pooled == doctest::Approx(rs + ro));
  CHECK(rep.r_delta == doctest::Approx(rs - ro));
  CHECK(rep.worst == doctest::Approx(0.5 * rep.r_pooled + 1.5 * rep.r_delta));
}

TEST_CASE("risk_closed_form") {
  testsup::ChainFixture fx;
  const SecondMoments obs = fx.moments_obs();
  const int N = 10;

  SUBCASE("zero kernel leaves the target second moment") {
    CHECK(risk_closed_form(Eigen::MatrixXd::Zero(N, 2 * N), obs) == doctest::Approx(20.0));
  }
  SUBCASE("hand example: homogeneous (0.5, 0.5) kernel") {
    // per dim: 2 - 2(0.5*1 + 0.5*2) + [0.5 0.5] [[1,1],[1,3]] [0.5 0.5]^t = 0.5
    Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(N, 2 * N);
    for (int k = 0; k < N; ++k) {
      lambda(k, k) = 0.5;
      lambda(k, N + k) = 0.5;
    }
    CHECK(risk_closed_form(lambda, obs) == doctest::Approx(5.0).epsilon(1e-12));
  }
  SUBCASE("nonnegative on empirical moments with random kernels") {
    const ScorePanel sc = solve_sem(fx.spec, std::nullopt, 200, 6);
    const SecondMoments emp = SecondMoments::from_scores(sc);
    for (int i = 0; i < 25; ++i) {
      const BetaKernel beta = testsup::random_kernel(fx.basis, 2, N, 100 + i, 1.0);
      CHECK(risk_closed_form(beta, emp) >= -1e-9);
    }
  }
}

TEST_CASE("risk_mc") {
  testsup::ChainFixture fx;
  const int N = 10;

  SUBCASE("zero kernel on zero curves") {
    ScorePanel zero;
    zero.target = Eigen::MatrixXd::Zero(5, N);
    zero.covariates = {Eigen::MatrixXd::Zero(5, N), Eigen::MatrixXd::Zero(5, N)};
    const CurvePanel panel = render_curves(zero, *fx.basis, fx.grid, "z");
    CHECK(risk_mc(BetaKernel::zero(fx.basis, 2, N, N), panel, *fx.basis) == 0.0);
  }
  SUBCASE("zero kernel on the observational preset gives the target energy") {
    const CurvePanel panel = fx.observational_panel(50000, 12);
    const auto res = risk_mc_detailed(BetaKernel::zero(fx.basis, 2, N, N), panel, *fx.basis);
    CHECK(std::abs(res.mean - 20.0) <= 3.0 * res.std_error);
  }
  SUBCASE("the structural kernel leaves only the target noise") {
    // lambda = identity on X1, zero on X2: residual is the target's own noise
    Eigen::MatrixXd c1 = Eigen::MatrixXd::Identity(N, N);
    BetaKernel beta(fx.basis, {c1, Eigen::MatrixXd::Zero(N, N)});
    const CurvePanel panel = fx.observational_panel(50000, 13);
    const auto res = risk_mc_detailed(beta, panel, *fx.basis);
    CHECK(std::abs(res.mean - 10.0) <= 3.0 * res.std_error + 0.05);  // + quadrature bias
  }
  SUBCASE("agrees with the closed form on random kernels") {
    const CurvePanel panel = fx.observational_panel(30000, 14);
    const SecondMoments obs = fx.moments_obs();
    for (int i = 0; i < 5; ++i) {
      const BetaKernel beta = testsup::random_kernel(fx.basis, 2, N, 300 + i, 0.3);
      const auto mc = risk_mc_detailed(beta, panel, *fx.basis);
      CHECK(std::abs(mc.mean - risk_closed_form(beta, obs)) <= 3.0 * mc.std_error + 0.05);
    }
  }
  SUBCASE("basis mismatch rejected") {
    const CurvePanel panel = fx.observational_panel(4, 15);
    const auto other = make_sine_basis(N + 2);
    CHECK_THROWS_AS(risk_mc(BetaKernel::zero(fx.basis, 2, N, N), panel, *other),
                    DimensionMismatch);
  }
}

TEST_CASE("verify_decomposition") {
  testsup::ChainFixture fx;
  const int N = 10;

  SUBCASE("gamma = 1 with the singleton family is exact") {
    const BetaKernel beta = testsup::random_kernel(fx.basis, 2, N, 1);
    const auto rep = verify_decomposition(fx.spec, fx.shift, beta, 1.0, 0, 1, 5);
    CHECK(rep.pass);
    CHECK(rep.scaled_shift_risk == doctest::Approx(rep.r_shift).epsilon(1e-12));
    CHECK(rep.max_candidate_risk == doctest::Approx(rep.decomposition).epsilon(1e-12));
  }
  SUBCASE("gamma = 4 with 200 candidates: bounded by the decomposition, equal at 2A") {
    const BetaKernel beta = fx.population_kernel(0.5);
    const auto rep = verify_decomposition(fx.spec, fx.shift, beta, 4.0, 0, 200, 17);
    CHECK(rep.pass);
    CHECK(rep.max_candidate_risk <= rep.decomposition + 1e-6);
    CHECK(std::abs(rep.scaled_shift_risk - rep.decomposition) <= 1e-6);
    CHECK(rep.candidates.size() == 200);
    CHECK(rep.candidates[0].is_scaled_shift);
  }
  SUBCASE("zero kernel: every environment risk is the target energy, maximal at the scaled shift") {
    const BetaKernel beta0 = BetaKernel::zero(fx.basis, 2, N, N);
    const auto rep = verify_decomposition(fx.spec, fx.shift, beta0, 2.0, 0, 100, 23);
    CHECK(rep.pass);
    for (const auto& c : rep.candidates)
      if (c.admissible) CHECK(c.risk <= rep.scaled_shift_risk + 1e-9);
    // oracle: r_obs = 20, r_shift picks up the shifted target variance
    CHECK(rep.r_obs == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(rep.r_shift == doctest::Approx(10.0 * ChainMoments::zz_a).epsilon(1e-12));
  }
  SUBCASE("monte carlo cross-check of the two observed risks") {
    const BetaKernel beta = fx.population_kernel(0.5);
    const auto rep = verify_decomposition(fx.spec, fx.shift, beta, 2.0, 20000, 50, 29);
    CHECK(rep.pass);
    CHECK(std::abs(rep.mc_r_obs - rep.r_obs) <= 3.0 * rep.mc_r_obs_se);
    CHECK(std::abs(rep.mc_r_shift - rep.r_shift) <= 3.0 * rep.mc_r_shift_se);
  }
  SUBCASE("empty candidate budget rejected") {
    const BetaKernel beta0 = BetaKernel::zero(fx.basis, 2, N, N);
    CHECK_THROWS_AS(verify_decomposition(fx.spec, fx.shift, beta0, 2.0, 0, 0, 1),
                    DegenerateFamily);
  }
}

TEST_CASE("risk_continuity_probe") {
  testsup::ChainFixture fx;
  const BetaKernel beta = fx.population_kernel(0.5);
  const Eigen::MatrixXd base = fx.shift.second_moment();
  const double base_norm = std::sqrt(base.trace());

  SUBCASE("constant sequence has zero gaps") {
    std::vector<Eigen::MatrixXd> seq(4, base);
    const auto rep =
        risk_continuity_probe(fx.spec, beta, seq, base, {0.0, 0.0, 0.0, 0.0});
    CHECK(rep.pass);
    for (double g : rep.gaps) CHECK(g <= 1e-10);
  }
  SUBCASE("scaled shifts (1 + 1/n) A shrink monotonically under a linear envelope") {
    std::vector<Eigen::MatrixXd> seq;
    std::vector<double> dists;
    for (int n = 1; n <= 16; n *= 2) {
      const double s = 1.0 + 1.0 / n;
      seq.push_back(s * s * base);          // second moment of the scaled shift
      dists.push_back(base_norm / n);       // mean-square distance of (1+1/n)A to A
    }
    const auto rep = risk_continuity_probe(fx.spec, beta, seq, base, dists);
    CHECK(rep.pass);
    for (std::size_t i = 1; i < rep.gaps.size(); ++i) CHECK(rep.gaps[i] < rep.gaps[i - 1]);
    CHECK(rep.envelope_constant > 0.0);
  }
  SUBCASE("sign-flipping one coordinate at rate 1/n vanishes in the limit") {
    const int N = 10;
    std::vector<Eigen::MatrixXd> seq;
    std::vector<double> dists;
    for (int n = 1; n <= 256; n *= 2) {
      Eigen::MatrixXd flip = Eigen::MatrixXd::Identity(3 * N, 3 * N);
      flip(N, N) -= 2.0 / n;  // first shifted coordinate moves toward its mirror
      seq.push_back(flip * base * flip.transpose());
      dists.push_back(2.0 / n * std::sqrt(base(N, N)));
    }
    const auto rep = risk_continuity_probe(fx.spec, beta, seq, base, dists);
    CHECK(rep.pass);
    // the gap decays with the (linear) distance: 256x smaller plus margin
    CHECK(rep.gaps.back() < 2e-2 * rep.gaps.front());
  }
}

TEST_SUITE_END();
