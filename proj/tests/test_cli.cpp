#include <doctest.h>

#include <fstream>

#include "test_support.hpp"
#include "worstrisk/experiment.hpp"

using namespace worstrisk;

TEST_SUITE_BEGIN("cli");

namespace {

std::filesystem::path write_config(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << body;
  return path;
}

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

double surface_max_abs(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);  // header
  double best = 0.0;
  while (std::getline(in, line)) {
    const auto last = line.rfind(',');
    best = std::max(best, std::abs(std::stod(line.substr(last + 1))));
  }
  return best;
}

}  // namespace

TEST_CASE("config parsing diagnostics") {
  SUBCASE("unknown scenario names the field") {
    const auto path = write_config("wr_cfg_bad_scenario.cfg", "scenario = frobnicate\n");
    try {
      parse_experiment_config(path);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("scenario") != std::string::npos);
    }
    std::filesystem::remove(path);
  }
  SUBCASE("malformed line carries its number") {
    const auto path =
        write_config("wr_cfg_bad_line.cfg", "scenario = shiftset-check\nnot a key value\n");
    try {
      parse_experiment_config(path);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    std::filesystem::remove(path);
  }
  SUBCASE("unknown field rejected with its name") {
    const auto path = write_config("wr_cfg_unknown.cfg",
                                   "scenario = shiftset-check\nsem.bogus = 1\n");
    try {
      parse_experiment_config(path);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("sem.bogus") != std::string::npos);
    }
    std::filesystem::remove(path);
  }
  SUBCASE("gamma entries must be positive") {
    const auto path = write_config("wr_cfg_gamma.cfg",
                                   "scenario = shiftset-check\ngamma_list = 1, -2\n");
    CHECK_THROWS_AS(parse_experiment_config(path), ConfigError);
    std::filesystem::remove(path);
  }
  SUBCASE("missing config file fails the run with status 1") {
    CHECK(run_experiment("/nonexistent/config.cfg", {}) == RunStatus::Failed);
  }
  SUBCASE("comments and overrides parse") {
    const auto path = write_config("wr_cfg_ok.cfg",
                                   "# a comment\nscenario = decomposition-check\n"
                                   "gamma_list = 4\nseed = 3\n"
                                   "decomposition.n_candidates = 50\n");
    const ExperimentConfig cfg = parse_experiment_config(path);
    CHECK(cfg.scenario == Scenario::DecompositionCheck);
    CHECK(cfg.decomposition_candidates == 50);
    std::filesystem::remove(path);
  }
}

TEST_CASE("illustration-population scenario writes surfaces with the expected shape") {
  const auto out_dir = std::filesystem::temp_directory_path() / "wr_cli_pop";
  std::filesystem::remove_all(out_dir);
  const auto path = write_config("wr_cfg_pop.cfg",
                                 "scenario = illustration-population\n"
                                 "gamma_list = 0.5, 500\n"
                                 "surface.resolution = 21\n"
                                 "output_dir = " + out_dir.string() + "\n");
  CHECK(run_experiment(path, {}) == RunStatus::Ok);
  for (const char* f : {"summary.csv", "manifest.txt", "beta_gamma_0.5.csv",
                        "beta_gamma_500.csv", "surface_x1_0.5.csv", "surface_x2_0.5.csv",
                        "surface_x1_500.csv", "surface_x2_500.csv"})
    CHECK(std::filesystem::exists(out_dir / f));

  // strong regularization suppresses the non-causal covariate's surface
  const double x1 = surface_max_abs(out_dir / "surface_x1_500.csv");
  const double x2 = surface_max_abs(out_dir / "surface_x2_500.csv");
  CHECK(x2 <= 0.15 * x1);

  const std::string manifest = read_all(out_dir / "manifest.txt");
  CHECK(manifest.find("config_hash=") != std::string::npos);
  CHECK(manifest.find("library_version=0.1.0") != std::string::npos);
  CHECK(manifest.find("wall_ms=") != std::string::npos);

  // kernel csv round trip
  const auto coeffs = read_beta_coeffs_csv(out_dir / "beta_gamma_500.csv");
  REQUIRE(coeffs.size() == 2);
  CHECK(coeffs[0](0, 0) == doctest::Approx(91.0 / 107.0).epsilon(1e-9));
  CHECK(coeffs[1](0, 0) == doctest::Approx(11.0 / 107.0).epsilon(1e-9));

  std::filesystem::remove(path);
  std::filesystem::remove_all(out_dir);
}

TEST_CASE("identical config and seed give byte-identical outputs") {
  const auto out_a = std::filesystem::temp_directory_path() / "wr_cli_det_a";
  const auto out_b = std::filesystem::temp_directory_path() / "wr_cli_det_b";
  std::filesystem::remove_all(out_a);
  std::filesystem::remove_all(out_b);
  const auto path = write_config("wr_cfg_det.cfg",
                                 "scenario = illustration-empirical\n"
                                 "n_samples = 200\ngamma_list = 0.5\nseed = 11\n"
                                 "surface.resolution = 9\n");
  RunOverrides a, b;
  a.output_dir = out_a;
  a.quiet = true;
  b.output_dir = out_b;
  b.quiet = true;
  REQUIRE(run_experiment(path, a) == RunStatus::Ok);
  REQUIRE(run_experiment(path, b) == RunStatus::Ok);
  for (const char* f : {"summary.csv", "beta_gamma_0.5.csv", "surface_x1_0.5.csv"})
    CHECK(read_all(out_a / f) == read_all(out_b / f));
  std::filesystem::remove(path);
  std::filesystem::remove_all(out_a);
  std::filesystem::remove_all(out_b);
}

TEST_CASE("decomposition-check scenario reports PASS") {
  const auto out_dir = std::filesystem::temp_directory_path() / "wr_cli_dec";
  std::filesystem::remove_all(out_dir);
  const auto path = write_config("wr_cfg_dec.cfg",
                                 "scenario = decomposition-check\n"
                                 "gamma_list = 4\n"
                                 "decomposition.n_candidates = 200\n"
                                 "decomposition.n_betas = 2\n"
                                 "output_dir = " + out_dir.string() + "\n");
  CHECK(run_experiment(path, {}) == RunStatus::Ok);
  const std::string summary = read_all(out_dir / "summary.csv");
  CHECK(summary.find("# overall,PASS") != std::string::npos);
  CHECK(std::filesystem::exists(out_dir / "decomposition_4_b0.csv"));
  std::filesystem::remove(path);
  std::filesystem::remove_all(out_dir);
}

TEST_CASE("shiftset-check scenario reports PASS with witnesses") {
  const auto out_dir = std::filesystem::temp_directory_path() / "wr_cli_shift";
  std::filesystem::remove_all(out_dir);
  const auto path = write_config("wr_cfg_shift.cfg",
                                 "scenario = shiftset-check\nshiftset.triples = 12\n"
                                 "output_dir = " + out_dir.string() + "\n");
  CHECK(run_experiment(path, {}) == RunStatus::Ok);
  const std::string report = read_all(out_dir / "shiftset_report.csv");
  CHECK(report.find("# overall,PASS") != std::string::npos);
  CHECK(report.find("wss_reject") != std::string::npos);
  CHECK(report.find("bin=") != std::string::npos);
  std::filesystem::remove(path);
  std::filesystem::remove_all(out_dir);
}

TEST_CASE("emit_surface") {
  const auto basis = make_sine_basis(4);
  const auto path = std::filesystem::temp_directory_path() / "wr_surface.csv";

  SUBCASE("zero kernel gives resolution^2 zero rows") {
    emit_surface(BetaKernel::zero(basis, 2, 4, 4), 0, 5, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,tau,value");
    int rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      CHECK(line.substr(line.rfind(',') + 1) == "0");
    }
    CHECK(rows == 25);
  }
  SUBCASE("values match beta_eval spot checks and re-render identically") {
    const BetaKernel beta = testsup::random_kernel(basis, 2, 4, 8);
    emit_surface(beta, 1, 3, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const auto c1 = line.find(',');
      const auto c2 = line.rfind(',');
      const double t = std::stod(line.substr(0, c1));
      const double tau = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
      const double v = std::stod(line.substr(c2 + 1));
      CHECK(v == doctest::Approx(beta.eval(t, tau, 1)).epsilon(1e-12));
    }
    const std::string first = read_all(path);
    emit_surface(beta, 1, 3, path);
    CHECK(read_all(path) == first);
  }
  SUBCASE("tiny resolutions rejected") {
    CHECK_THROWS_AS(emit_surface(BetaKernel::zero(basis, 2, 4, 4), 0, 1, path),
                    DomainError);
  }
  std::filesystem::remove(path);
}

TEST_CASE("matrix csv round trip") {
  const auto path = std::filesystem::temp_directory_path() / "wr_matrix.csv";
  Rng rng(31);
  Eigen::MatrixXd m(3, 4);
  for (Eigen::Index r = 0; r < 3; ++r) m.row(r) = rng.normal_vector(4).transpose();
  write_matrix_csv(m, {"Y1", "Y2", "X1", "X2"}, path);
  const Eigen::MatrixXd back = read_matrix_csv(path);
  REQUIRE(back.rows() == 3);
  REQUIRE(back.cols() == 4);
  CHECK((back - m).cwiseAbs().maxCoeff() < 1e-15);
  const std::string content = read_all(path);
  CHECK(content.rfind("Y1,Y2,X1,X2\n", 0) == 0);
  std::filesystem::remove(path);
}

TEST_CASE("estimation report format") {
  const auto path = std::filesystem::temp_directory_path() / "wr_est.csv";
  write_estimation_csv({{100, 7, 0.5, "eigenbasis", 0.25, 0.5, 12.5}}, path);
  const std::string content = read_all(path);
  CHECK(content.find("n,seed,gamma,route,coeff_error,frobenius_error,runtime_ms") == 0);
  CHECK(content.find("100,7,0.5,eigenbasis,0.25,0.5,12.5") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_SUITE_END();
