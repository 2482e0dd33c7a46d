#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtherm_cli/config.hpp"
#include "qtherm_cli/table.hpp"

namespace qtherm::cli {

struct RunOptions {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides run.seed
  int threads = 1;
};

struct ExperimentOutput {
  std::vector<Table> tables;
  nlohmann::json results = nlohmann::json::object();
};

struct Context {
  std::uint64_t seed = 0;
  int threads = 1;
};

const std::vector<std::string>& experiment_names();

// Computes without touching the file system. Throws ConfigError for bad input and
// std::out_of_range for an unknown experiment.
ExperimentOutput compute_experiment(const std::string& name, const Config& cfg, const Context& ctx);

// Writes <out>/<name>.csv, <out>/<name>_<table>.csv for secondary tables and <out>/<name>.json.
// Returns a Status; messages go to err.
int run_experiment(const std::string& name, const Config& cfg, const RunOptions& opt,
                   std::ostream& err);

// Threads from the flag, else QTHERM_THREADS, else 1.
int resolve_threads(std::optional<int> flag);

}  // namespace qtherm::cli
