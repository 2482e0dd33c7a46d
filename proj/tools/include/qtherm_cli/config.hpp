#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace qtherm::cli {

enum Status : int { ok = 0, invalid_config = 1, unknown_experiment = 2, io_failure = 3, failed = 4 };

// Carries the offending key so messages read "model.L: expected an integer, got 'x'".
struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field(field) {}
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key = value lines grouped under [section] headers; keys are addressed as section.key.
// '#' and ';' start comments. Lists are comma separated.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& origin = "<config>");
  static Config parse_string(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string str(const std::string& key) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  double num(const std::string& key) const;
  double num(const std::string& key, double fallback) const;
  long integer(const std::string& key) const;
  long integer(const std::string& key, long fallback) const;
  std::uint64_t u64(const std::string& key, std::uint64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> list(const std::string& key) const;
  std::vector<double> list(const std::string& key, const std::vector<double>& fallback) const;

  // Keys present in the file that no accessor has asked for.
  std::vector<std::string> unused() const;
  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  const std::string& raw(const std::string& key) const;
  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> used_;
};

double parse_double(const std::string& field, const std::string& text);

}  // namespace qtherm::cli
