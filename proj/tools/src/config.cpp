#include "qtherm_cli/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace qtherm::cli {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

double parse_double(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || p != t.data() + t.size() || t.empty())
    throw ConfigError(field, "expected a number, got '" + text + "'");
  return v;
}

Config Config::parse(std::istream& in, const std::string& origin) {
  Config c;
  std::string line, section;
  for (int no = 1; std::getline(in, line); ++no) {
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(no);
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) throw ConfigError("", where + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("", where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("", where + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (c.kv_.count(full)) throw ConfigError(full, where + ": duplicate key");
    c.kv_[full] = trim(line.substr(eq + 1));
  }
  return c;
}

Config Config::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse(in, path);
}

bool Config::has(const std::string& key) const { return kv_.count(key) != 0; }

void Config::set(const std::string& key, const std::string& value) { kv_[key] = value; }

const std::string& Config::raw(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError(key, "required field missing");
  used_.insert(key);
  return it->second;
}

std::string Config::str(const std::string& key) const { return raw(key); }

std::string Config::str(const std::string& key, const std::string& fallback) const {
  return has(key) ? raw(key) : fallback;
}

double Config::num(const std::string& key) const { return parse_double(key, raw(key)); }

double Config::num(const std::string& key, double fallback) const {
  return has(key) ? num(key) : fallback;
}

long Config::integer(const std::string& key) const {
  const std::string& t = raw(key);
  long v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || p != t.data() + t.size() || t.empty())
    throw ConfigError(key, "expected an integer, got '" + t + "'");
  return v;
}

long Config::integer(const std::string& key, long fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::uint64_t Config::u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string& t = raw(key);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || p != t.data() + t.size() || t.empty())
    throw ConfigError(key, "expected an unsigned 64-bit integer, got '" + t + "'");
  return v;
}

bool Config::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& t = raw(key);
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  throw ConfigError(key, "expected true or false, got '" + t + "'");
}

std::vector<double> Config::list(const std::string& key) const {
  const std::string& t = raw(key);
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = t.find(',', start);
    out.push_back(parse_double(key, t.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<double> Config::list(const std::string& key, const std::vector<double>& fallback) const {
  return has(key) ? list(key) : fallback;
}

std::vector<std::string> Config::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : kv_)
    if (!used_.count(k)) out.push_back(k);
  return out;
}

}  // namespace qtherm::cli
