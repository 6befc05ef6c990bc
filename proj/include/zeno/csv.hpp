#pragma once

// Minimal RFC 4180 tables: '.' decimal separator, 17 significant digits,
// LF line endings, mandatory header row. Empty cells stand for columns an
// experiment did not compute.

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

namespace zeno {

using Cell = std::variant<std::monostate, double, long long, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row) {
    if (row.size() != header.size()) {
      throw std::invalid_argument("table row has " + std::to_string(row.size()) +
                                  " cells, header has " + std::to_string(header.size()));
    }
    rows.push_back(std::move(row));
  }
};

inline std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string quote_if_needed(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string format_cell(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(const std::string& s) const { return quote_if_needed(s); }
  };
  return std::visit(Visitor{}, cell);
}

inline void write_csv(const Table& table, std::ostream& out) {
  auto write_line = [&](const auto& cells, auto&& fmt) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << fmt(cells[i]);
    }
    out << '\n';
  };
  write_line(table.header, quote_if_needed);
  for (const auto& row : table.rows) write_line(row, format_cell);
}

/// Writes the table to `path`; throws std::runtime_error on I/O failure.
inline void emit_csv(const Table& table, const std::string& path) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(table, file);
  file.flush();
  if (!file) throw std::runtime_error("write to '" + path + "' failed");
}

/// Splits CSV text into string fields. Handles quoted fields.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    any = true;
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (any) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

/// Parses a numeric field written by format_double ("inf"/"nan" included).
inline double parse_double_field(const std::string& field) {
  if (field == "inf") return HUGE_VAL;
  if (field == "-inf") return -HUGE_VAL;
  if (field == "nan") return std::nan("");
  double value = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw std::invalid_argument("not a number: '" + field + "'");
  }
  return value;
}

}  // namespace zeno
