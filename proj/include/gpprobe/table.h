#pragma once

// Small CSV reader/writer and locale-independent float formatting shared by
// the analysis stages and the report layer.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace gpprobe {

// Shortest decimal string that parses back to exactly `v`.
std::string FormatShortest(double v);
// Fixed notation with `decimals` digits, correctly rounded from the binary
// value. "-0.00" is printed as "0.00".
std::string FormatFixed(double v, int decimals);
// Shortest representation truncated (not rounded) to `decimals` digits with
// trailing zeros removed.
std::string FormatTruncated(double v, int decimals);

double ParseDouble(std::string_view s, const std::string& where);
int ParseInt(std::string_view s, const std::string& where);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int Column(std::string_view name) const;  // -1 if absent
  const std::string& Cell(std::size_t row, std::string_view column) const;
};

std::string ToCsv(const CsvTable& table);
CsvTable ParseCsv(std::string_view text, const std::string& source_name);
CsvTable ReadCsv(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, std::string_view content);
std::string ReadTextFile(const std::filesystem::path& path);

}  // namespace gpprobe
