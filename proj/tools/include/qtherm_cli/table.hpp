#pragma once

#include <string>
#include <vector>

namespace qtherm::cli {

struct Table {
  std::string name;  // file stem suffix; empty for the primary table
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row) { rows.push_back(std::move(row)); }
};

// Shortest text that reads back to the same double.
std::string format_double(double v);

// CSV with a header line, '.' decimals and LF endings. Throws std::invalid_argument when a row
// width differs from the schema and IoError when the file cannot be written.
void write_table(const std::vector<std::vector<double>>& rows,
                 const std::vector<std::string>& schema, const std::string& path);

std::string render_table(const std::vector<std::vector<double>>& rows,
                         const std::vector<std::string>& schema);

}  // namespace qtherm::cli
