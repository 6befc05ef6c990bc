// zeno: batch front-end for the decoherence and Zeno-protocol experiments.
//
//   zeno run <config> [--seed N] [--out DIR] [--workers N]
//   zeno validate <config>

#include "zeno/runner.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"Single-qubit decoherence and quantum Zeno protocol simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<unsigned> workers;

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "key=value config file")->required();
  run->add_option("--seed", seed, "Override the base seed");
  run->add_option("--out", out_dir, "Override the output directory");
  run->add_option("--workers", workers, "Worker threads (0: one per hardware thread)");

  auto* validate = app.add_subcommand("validate", "Parse and check a config file without running it");
  validate->add_option("config", config_path, "key=value config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    zeno::ExperimentConfig config = zeno::load_config(config_path);
    if (*validate) {
      for (const auto& w : config.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << config_path << ": ok (" << zeno::to_string(config.experiment) << ")\n";
      return 0;
    }
    if (seed) config.seed = *seed;
    if (out_dir) config.output_dir = *out_dir;
    if (workers) config.workers = *workers;
    const zeno::RunOutcome outcome = zeno::run(config, std::cerr);
    outcome.summary.write(std::cout);
    for (const auto& f : outcome.files) std::cerr << "wrote " << f << '\n';
    return outcome.exit_status;
  } catch (const zeno::ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
