// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal CSV tables: comma separated, header row, no quoting (fields never
// contain commas or newlines).

#ifndef CODESIGN_CSV_HPP_
#define CODESIGN_CSV_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace codesign {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(std::string_view name) const;  // throws if absent
  double number(std::size_t row, std::string_view name) const;
};

// Shortest-exact decimal for doubles ("nan", "inf", "-inf" for specials).
std::string format_real(double v);
double parse_real(std::string_view s);

std::string to_csv(const CsvTable& table);
CsvTable parse_csv(std::string_view text, const std::string& origin = "<csv>");
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace codesign

#endif  // CODESIGN_CSV_HPP_
