#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace worstrisk {

enum class Scenario {
  IllustrationPopulation,
  IllustrationEmpirical,
  DecompositionCheck,
  ConsistencySweep,
  ShiftsetCheck,
};

struct ExperimentConfig {
  Scenario scenario = Scenario::IllustrationPopulation;
  std::uint64_t seed = 1;
  std::size_t n_samples = 1000;
  int n_grid = 100;
  int n_basis = 10;
  std::vector<double> gamma_list{0.5};
  std::filesystem::path output_dir = "out";

  // sem.*
  double sem_b_x1y = 1.0;
  double sem_b_yx2 = 1.0;
  double sem_noise_sd = 1.0;
  // shift.*
  double shift_mean = 0.1;
  double shift_sd = 0.1;
  // estimator.*
  double estimator_m = 10.0;
  double split_numerator = 0.5;
  double split_denominator = 0.25;
  double split_eigen = 0.25;
  bool centralize = false;
  // decomposition.*
  std::size_t decomposition_candidates = 200;
  std::size_t decomposition_betas = 5;
  double decomposition_tol = 1e-6;
  // sweep.*
  std::vector<std::size_t> sweep_n_list{50, 200, 1000};
  std::size_t sweep_seeds = 20;
  // shiftset.*
  std::size_t shiftset_triples = 50;

  int surface_resolution = 33;
  bool write_panels = false;
};

/// Parses the flat `key = value` config format; throws ConfigError with a
/// line/field diagnostic on malformed input.
ExperimentConfig parse_experiment_config(const std::filesystem::path& path);

enum class RunStatus : int { Ok = 0, Failed = 1, CheckFailed = 2 };

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
  bool quiet = false;
};

/// Executes a scenario end to end, writing summary.csv, per-gamma coefficient
/// files, surface grids and a run manifest into the output directory.
RunStatus run_experiment(const std::filesystem::path& config_path, const RunOverrides& overrides);

}  // namespace worstrisk
