#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tailfuse/util.hpp"

namespace tailfuse {

/// Rectangular CSV of numbers, rows = observations, columns = clusters.
/// An optional first row of non-numeric cells is kept as column names.
/// Empty cells and ragged rows are rejected.
struct CsvTable {
  std::vector<std::string> header;  // empty when the file had none
  Matrix values;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Writes with 17 significant digits so a round trip reproduces the
/// doubles exactly.
void write_csv(std::ostream& out, const Matrix& values,
               const std::vector<std::string>& header = {});
void write_csv_file(const std::string& path, const Matrix& values,
                    const std::vector<std::string>& header = {});

std::string format_double(double v);  // %.17g

}  // namespace tailfuse
