#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spdcsim {

/// Shortest round-trip decimal form of a double; byte-stable across runs.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Reads a numeric CSV. `required` names must appear, in order, as the first
/// columns of the header; extra trailing columns are kept. Throws IoError on
/// missing file or malformed numbers.
CsvTable read_csv(const std::string& path, const std::vector<std::string>& required);

/// Writes header + numeric rows with format_double. Throws IoError.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace spdcsim
