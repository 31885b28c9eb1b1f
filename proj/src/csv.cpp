#include "tailfuse/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tailfuse {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  while (end && *end == ' ') ++end;
  return end && *end == '\0' && errno == 0;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable read_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> header;
  std::string line;
  std::size_t cols = 0;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    std::vector<double> row(cells.size());
    bool numeric = true;
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (!parse_double(cells[i], row[i])) {
        numeric = false;
        break;
      }
    if (first) {
      first = false;
      cols = cells.size();
      if (!numeric) {
        header = cells;
        continue;
      }
    }
    if (!numeric)
      throw std::invalid_argument("csv: non-numeric or empty cell at line " +
                                  std::to_string(line_no));
    if (cells.size() != cols)
      throw std::invalid_argument("csv: ragged row at line " + std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("csv: no data rows");

  CsvTable table;
  table.header = std::move(header);
  table.values = Matrix(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) table.values(i, j) = rows[i][j];
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("csv: cannot open " + path);
  return read_csv(in);
}

void write_csv(std::ostream& out, const Matrix& values, const std::vector<std::string>& header) {
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (j) out << ',';
      out << header[j];
    }
    out << '\n';
  }
  for (std::size_t i = 0; i < values.rows(); ++i) {
    for (std::size_t j = 0; j < values.cols(); ++j) {
      if (j) out << ',';
      out << format_double(values(i, j));
    }
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const Matrix& values,
                    const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("csv: cannot write " + path);
  write_csv(out, values, header);
}

}  // namespace tailfuse
