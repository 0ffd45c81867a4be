// ccst <experiment> --config <path> [--out <dir>]
//
// Exit codes: 0 success, 1 configuration or usage error, 2 solver error.
// CCST_THREADS sets the number of worker threads (default 1).

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ccst/config.hpp"
#include "ccst/errors.hpp"
#include "ccst/experiments.hpp"
#include "ccst/io.hpp"

namespace {

std::size_t threads_from_env() {
  const char* v = std::getenv("CCST_THREADS");
  if (!v || !*v) return 1;
  try {
    std::size_t used = 0;
    const long n = std::stol(v, &used);
    if (used != std::string(v).size() || n < 1) throw std::invalid_argument(v);
    return std::size_t(n);
  } catch (const std::exception&) {
    throw ccst::InputError(std::string("CCST_THREADS = '") + v + "' must be a positive integer");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Couple-stress mixed finite element solver"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir = "out";

  for (const auto& name : ccst::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "INI config file")->required();
    sub->add_option("--out", out_dir, "output directory (default: out)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string experiment = app.get_subcommands().front()->get_name();
  try {
    const std::size_t threads = threads_from_env();
    const ccst::ExperimentConfig cfg = ccst::load_config(experiment, config_path);
    for (const auto& line : ccst::run_experiment(cfg, out_dir, threads)) std::cout << line << '\n';
    std::cout << "artifacts written to " << std::filesystem::path(out_dir).string() << '\n';
    return 0;
  } catch (const ccst::InputError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const ccst::IoError& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return 1;
  } catch (const ccst::SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 2;
  }
}
