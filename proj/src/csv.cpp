#include "tvcap/csv.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>

#include "tvcap/error.hpp"

namespace tvcap::csv {

std::string format_double(double value) {
  std::array<char, 64> buffer{};
  const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value,
                                    std::chars_format::general, 17);
  return std::string(buffer.data(), result.ptr);
}

void write_columns(std::ostream& out, std::span<const Column> columns) {
  if (columns.empty()) return;
  const std::size_t rows = columns.front().values.size();
  for (const auto& column : columns) {
    require(column.values.size() == rows, Errc::invalid_argument,
            "CSV column '" + column.name + "' has a different length");
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out << (c ? "," : "") << columns[c].name;
  }
  out << '\n';
  std::string line;
  for (std::size_t r = 0; r < rows; ++r) {
    line.clear();
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) line += ',';
      line += format_double(columns[c].values[r]);
    }
    line += '\n';
    out << line;
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string current;
  for (char ch : line) {
    if (ch == sep) {
      fields.push_back(current);
      current.clear();
    } else if (ch != '\r') {
      current += ch;
    }
  }
  fields.push_back(current);
  return fields;
}

namespace {

double parse_number(const std::string& text, std::size_t line_no) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  const auto result = std::from_chars(first, last, value);
  if (result.ec != std::errc{} || result.ptr != last) {
    fail(Errc::parse_error, "line " + std::to_string(line_no) + ": '" + text + "' is not a number");
  }
  return value;
}

}  // namespace

Table read_table(std::istream& in) {
  Table table;
  std::string line;
  if (!std::getline(in, line)) fail(Errc::parse_error, "empty CSV input");
  table.header = split(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line);
    require(fields.size() == table.header.size(), Errc::parse_error,
            "line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                " fields, expected " + std::to_string(table.header.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& field : fields) row.push_back(parse_number(field, line_no));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace tvcap::csv
