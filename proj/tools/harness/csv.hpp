/*
   Copyright 2026 The fbdg Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace fbdg::harness {

/// A cell is a number (written with 12 significant digits), an integer, a
/// string, or empty.
using Cell = std::variant<std::monostate, double, long long, std::string>;

std::string format_number(double value);

/// Comma-separated, header row, LF line endings.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);

  void row(const std::vector<Cell>& cells);
  const std::vector<std::string>& header() const { return header_; }

 private:
  std::ostream& out_;
  std::vector<std::string> header_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;  // source line of each row

  std::size_t column(const std::string& name) const;
  /// Numeric column; throws Error(kParse) naming the line of a bad cell.
  std::vector<double> numbers(std::size_t column) const;
};

CsvTable read_csv(std::istream& in, const std::string& origin);
CsvTable read_csv_file(const std::string& path);

}  // namespace fbdg::harness
