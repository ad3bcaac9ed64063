// Copyright 2026 The wheelsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wheelsim/csv.hpp"

#include <array>
#include <charconv>
#include <sstream>

namespace wheelsim {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_field(const std::string& text, std::size_t line_no) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error("ParseError", "bad CSV field '" + text + "' on line " + std::to_string(line_no));
  }
  return value;
}

}  // namespace

std::vector<ChannelRow> read_channel_csv(std::istream& in, const std::string& value_column) {
  std::string line;
  std::size_t line_no = 0;
  const std::string expected = "t_ms,channel," + value_column;
  if (!std::getline(in, line)) throw Error("ParseError", "empty CSV, expected " + expected);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected) throw Error("ParseError", "CSV header must be " + expected);

  std::vector<ChannelRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != 3) {
      throw Error("ParseError", "expected 3 CSV fields on line " + std::to_string(line_no));
    }
    rows.push_back({parse_field<Millis>(fields[0], line_no), fields[1],
                    parse_field<double>(fields[2], line_no)});
  }
  return rows;
}

void write_channel_csv(std::ostream& out, const std::string& value_column,
                       const std::vector<ChannelRow>& rows) {
  out << "t_ms,channel," << value_column << '\n';
  for (const auto& r : rows) out << r.t_ms << ',' << r.channel << ',' << format_number(r.value) << '\n';
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace wheelsim
