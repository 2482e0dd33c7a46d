#include "qtherm_cli/table.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

#include "qtherm_cli/config.hpp"

namespace qtherm::cli {

std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // no "-0" in the output
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, p);
}

std::string render_table(const std::vector<std::vector<double>>& rows,
                         const std::vector<std::string>& schema) {
  if (schema.empty()) throw std::invalid_argument("table schema has no columns");
  std::string out;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (schema[c].empty()) throw std::invalid_argument("unnamed column " + std::to_string(c));
    if (schema[c].find_first_of(",\"\n") != std::string::npos)
      throw std::invalid_argument("column name '" + schema[c] + "' needs quoting");
    out += (c ? "," : "") + schema[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != schema.size())
      throw std::invalid_argument("row " + std::to_string(r) + " has " +
                                  std::to_string(rows[r].size()) + " values for " +
                                  std::to_string(schema.size()) + " columns");
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c) out += ',';
      out += format_double(rows[r][c]);
    }
    out += '\n';
  }
  return out;
}

void write_table(const std::vector<std::vector<double>>& rows,
                 const std::vector<std::string>& schema, const std::string& path) {
  const std::string text = render_table(rows, schema);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  f.close();
  if (!f) throw IoError("write to '" + path + "' failed");
}

}  // namespace qtherm::cli
