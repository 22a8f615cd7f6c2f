#include "gpprobe/table.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gpprobe/error.h"

namespace gpprobe {

std::string FormatShortest(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string FormatFixed(double v, int decimals) {
  if (!std::isfinite(v)) return FormatShortest(v);
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, decimals);
  std::string s(buf, res.ptr);
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string FormatTruncated(double v, int decimals) {
  if (!std::isfinite(v)) return FormatShortest(v);
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed);
  std::string s(buf, res.ptr);
  const auto dot = s.find('.');
  if (dot != std::string::npos) {
    if (s.size() > dot + 1 + decimals) s.resize(dot + 1 + decimals);
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

double ParseDouble(std::string_view s, const std::string& where) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ValidationError(where + ": not a number: '" + std::string(s) + "'");
  }
  return v;
}

int ParseInt(std::string_view s, const std::string& where) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ValidationError(where + ": not an integer: '" + std::string(s) + "'");
  }
  return v;
}

int CsvTable::Column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

const std::string& CsvTable::Cell(std::size_t row, std::string_view column) const {
  const int c = Column(column);
  if (c < 0) throw ValidationError("csv: missing column '" + std::string(column) + "'");
  return rows.at(row).at(c);
}

namespace {

std::string Escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void AppendRow(std::string& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    out += Escape(row[i]);
  }
  out += '\n';
}

}  // namespace

std::string ToCsv(const CsvTable& table) {
  std::string out;
  AppendRow(out, table.header);
  for (const auto& r : table.rows) AppendRow(out, r);
  return out;
}

CsvTable ParseCsv(std::string_view text, const std::string& source_name) {
  CsvTable t;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool any = false;
  const auto end_row = [&] {
    row.push_back(std::move(cell));
    cell.clear();
    if (t.header.empty()) {
      t.header = std::move(row);
    } else {
      if (row.size() != t.header.size()) {
        throw ValidationError(source_name + ": row " + std::to_string(t.rows.size() + 2) +
                              " has " + std::to_string(row.size()) + " cells, expected " +
                              std::to_string(t.header.size()));
      }
      t.rows.push_back(std::move(row));
    }
    row.clear();
    any = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(cell));
      cell.clear();
      any = true;
    } else if (c == '\n') {
      end_row();
    } else if (c != '\r') {
      cell += c;
      any = true;
    }
  }
  if (any || !cell.empty() || !row.empty()) end_row();
  return t;
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

CsvTable ReadCsv(const std::filesystem::path& path) {
  return ParseCsv(ReadTextFile(path), path.string());
}

void WriteTextFile(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("short write: " + path.string());
}

}  // namespace gpprobe
