#include <unistd.h>

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "qtherm/spectra.hpp"
#include "qtherm_cli/runner.hpp"

namespace cli = qtherm::cli;

int main(int argc, char** argv) {
  // OpenBLAS 0.3.20 picks a faulty dgemm kernel on Cooper Lake; the core type is read at load
  // time, so restart once with a known-good one.
  if (!std::getenv("OPENBLAS_CORETYPE") && !qtherm::blas_self_check()) {
    setenv("OPENBLAS_CORETYPE", "Haswell", 1);
    execv("/proc/self/exe", argv);
  }

  CLI::App app{"qtherm: exact-diagonalization and open-system transport experiments"};
  std::string experiment, config, out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  app.add_option("experiment", experiment, "experiment name")->required();
  app.add_option("--config", config, "key = value config file")->required();
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "RNG seed, overrides run.seed");
  app.add_option("--threads", threads, "worker threads for sweeps (QTHERM_THREADS)")
      ->check(CLI::PositiveNumber);
  app.footer("experiments: level-stats kubo eth-diagonal eth-offdiag gamma-ratio banded-goe f2 fdt "
             "qfi otoc typicality driven bd-ness meso-engine lb-benchmark");
  CLI11_PARSE(app, argc, argv);

  cli::Config cfg;
  try {
    cfg = cli::Config::load(config);
  } catch (const cli::IoError& e) {
    std::cerr << e.what() << '\n';
    return cli::io_failure;
  } catch (const cli::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return cli::invalid_config;
  }
  cli::RunOptions opt;
  opt.out_dir = out;
  opt.seed = seed;
  opt.threads = cli::resolve_threads(threads);
  return cli::run_experiment(experiment, cfg, opt, std::cerr);
}
