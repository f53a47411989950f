#include <CLI11.hpp>
#include <string>

#include "worstrisk/experiment.hpp"
#include "worstrisk/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"worst-risk functional regression experiments"};
  app.set_version_flag("--version", std::string(worstrisk::version()));

  std::string config_path;
  worstrisk::RunOverrides overrides;
  std::uint64_t seed_override = 0;
  std::string out_override;

  auto* run = app.add_subcommand("run", "execute a config-driven experiment scenario");
  run->add_option("config", config_path, "experiment config file")->required();
  auto* seed_opt = run->add_option("--seed", seed_override, "override the config seed");
  auto* out_opt = run->add_option("--out", out_override, "override the output directory");
  run->add_flag("--quiet", overrides.quiet, "suppress progress output");
  app.require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  if (*seed_opt) overrides.seed = seed_override;
  if (*out_opt) overrides.output_dir = out_override;
  return static_cast<int>(worstrisk::run_experiment(config_path, overrides));
}
