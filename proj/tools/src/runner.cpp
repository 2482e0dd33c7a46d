#include "qtherm_cli/runner.hpp"

#include <boost/version.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "qtherm/spectra.hpp"

#ifndef QTHERM_VERSION
#define QTHERM_VERSION "unknown"
#endif

namespace qtherm::cli {

int resolve_threads(std::optional<int> flag) {
  if (flag) return std::max(1, *flag);
  if (const char* env = std::getenv("QTHERM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return 1;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  f.close();
  if (!f) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

int run_experiment(const std::string& name, const Config& cfg, const RunOptions& opt,
                   std::ostream& err) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    err << "unknown experiment '" << name << "'; expected one of:";
    for (const auto& n : names) err << ' ' << n;
    err << '\n';
    return unknown_experiment;
  }

  Context ctx;
  ctx.threads = opt.threads;
  ExperimentOutput out;
  double wall = 0.0;
  try {
    if (cfg.has("run.experiment") && cfg.str("run.experiment") != name)
      throw ConfigError("run.experiment", "config is for '" + cfg.str("run.experiment") +
                                              "', not '" + name + "'");
    // read run.seed even when overridden so a bad value is still reported
    const std::uint64_t file_seed = cfg.u64("run.seed", 0);
    ctx.seed = opt.seed ? *opt.seed : file_seed;
    const auto t0 = std::chrono::steady_clock::now();
    out = compute_experiment(name, cfg, ctx);
    wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (const auto extra = cfg.unused(); !extra.empty())
      throw ConfigError(extra.front(), "unknown field for experiment '" + name + "'");
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << '\n';
    return invalid_config;
  } catch (const std::domain_error& e) {
    err << "invalid config: " << e.what() << '\n';
    return invalid_config;
  } catch (const std::exception& e) {
    err << name << " failed: " << e.what() << '\n';
    return failed;
  }

  try {
    const std::filesystem::path dir(opt.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    nlohmann::json files = nlohmann::json::array();
    for (const auto& t : out.tables) {
      const std::string file = name + (t.name.empty() ? "" : "_" + t.name) + ".csv";
      write_table(t.rows, t.columns, (dir / file).string());
      files.push_back(file);
    }
    nlohmann::json side;
    side["experiment"] = name;
    side["version"] = QTHERM_VERSION;
    side["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                       std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                       std::to_string(EIGEN_MINOR_VERSION)},
                         {"boost", BOOST_LIB_VERSION}};
    side["seed"] = ctx.seed;
    side["threads"] = ctx.threads;
    side["config"] = cfg.entries();
    side["wall_time_s"] = wall;
    side["tables"] = files;
    side["results"] = out.results;
    write_text(dir / (name + ".json"), side.dump(2) + "\n");
  } catch (const IoError& e) {
    err << "output error: " << e.what() << '\n';
    return io_failure;
  }
  return ok;
}

}  // namespace qtherm::cli
