#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace tvcap::csv {

// Always 17 significant digits (round-trips any double, stable across reruns).
std::string format_double(double value);

struct Column {
  std::string name;
  std::span<const double> values;
};

// Writes a header row and one row per index. All columns must have equal length.
void write_columns(std::ostream& out, std::span<const Column> columns);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_table(std::istream& in);

std::vector<std::string> split(const std::string& line, char sep = ',');

}  // namespace tvcap::csv
