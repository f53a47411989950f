#include <benchmark/benchmark.h>

#include "worstrisk/estimation.hpp"
#include "worstrisk/risk.hpp"

using namespace worstrisk;

namespace {

struct Fixture {
  SemSpec spec = chain_preset(10);
  ShiftSpec shift = chain_shift(10);
  BasisPtr basis = make_sine_basis(10);
  GridPtr grid = make_uniform_grid(0.0, 1.0, 100);
};

const Fixture& fixture() {
  static Fixture fx;
  return fx;
}

}  // namespace

static void BM_SolveSem(benchmark::State& state) {
  const auto& fx = fixture();
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_sem(fx.spec, fx.shift, n, seed++));
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_SolveSem)->Arg(1000)->Arg(10000);

static void BM_RenderAndScores(benchmark::State& state) {
  const auto& fx = fixture();
  const ScorePanel scores = solve_sem(fx.spec, fx.shift, 1000, 3);
  for (auto _ : state) {
    const CurvePanel panel = render_curves(scores, *fx.basis, fx.grid, "bench");
    benchmark::DoNotOptimize(project_scores(panel, *fx.basis));
  }
}
BENCHMARK(BM_RenderAndScores);

static void BM_Eigendecompose(benchmark::State& state) {
  const auto& fx = fixture();
  const Eigen::MatrixXd shift_moment = chain_shift(10).second_moment();
  const SecondMoments mom = population_moments(fx.spec, &shift_moment);
  const CovOperator op = make_cov_operator(mom.covariate, 2, 10);
  for (auto _ : state) benchmark::DoNotOptimize(eigendecompose(op));
}
BENCHMARK(BM_Eigendecompose);

static void BM_RiskClosedForm(benchmark::State& state) {
  const auto& fx = fixture();
  const SecondMoments mom = population_moments(fx.spec, nullptr);
  const Eigen::MatrixXd lambda = Eigen::MatrixXd::Constant(10, 20, 0.25);
  for (auto _ : state) benchmark::DoNotOptimize(risk_closed_form(lambda, mom));
}
BENCHMARK(BM_RiskClosedForm);

static void BM_RiskMonteCarlo(benchmark::State& state) {
  const auto& fx = fixture();
  const auto n = static_cast<std::size_t>(state.range(0));
  const CurvePanel panel =
      render_curves(solve_sem(fx.spec, std::nullopt, n, 5), *fx.basis, fx.grid, "bench");
  const BetaKernel beta(fx.basis, {Eigen::MatrixXd::Identity(10, 10),
                                   Eigen::MatrixXd::Zero(10, 10)});
  for (auto _ : state) benchmark::DoNotOptimize(risk_mc(beta, panel, *fx.basis));
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_RiskMonteCarlo)->Arg(10000)->Arg(50000);

static void BM_Thm5Estimator(benchmark::State& state) {
  const auto& fx = fixture();
  const auto n = static_cast<std::size_t>(state.range(0));
  const CurvePanel pa =
      render_curves(solve_sem(fx.spec, fx.shift, n, 7), *fx.basis, fx.grid, "A");
  const CurvePanel po =
      render_curves(solve_sem(fx.spec, std::nullopt, n, 8), *fx.basis, fx.grid, "O");
  const SplitPlan split = make_split(n, {0.5, 0.25, 0.25}, 9);
  EstimatorConfig cfg;
  cfg.gamma = 0.5;
  for (auto _ : state)
    benchmark::DoNotOptimize(fixed_basis_estimator(pa, po, split, cfg, *fx.basis));
}
BENCHMARK(BM_Thm5Estimator)->Arg(500)->Arg(1000);

BENCHMARK_MAIN();
