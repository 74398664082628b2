#pragma once

// Tabular output: CSV with unit-suffixed headers or a JSON mirror. Both start
// with the schema tag so downstream readers can check compatibility.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "invis/error.hpp"

namespace invis::io {

inline constexpr std::string_view kSchema = "invis-table/1";

enum class Format { csv, json };

inline Format parse_format(std::string_view s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw ValidationError("unknown output format '" + std::string(s) + "' (csv or json)");
}

using Cell = std::variant<double, std::string>;
using Json = nlohmann::ordered_json;

struct Table {
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, Json>> meta;

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("table row width mismatch in " + kind);
    rows.push_back(std::move(row));
  }
  void add_meta(std::string key, Json value) { meta.emplace_back(std::move(key), std::move(value)); }
};

/// Shortest round-trip-safe text for a double; fixed so output is byte-stable.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

inline void write_csv(const Table& t, std::ostream& os) {
  os << "# " << kSchema << ' ' << t.kind << '\n';
  for (const auto& [k, v] : t.meta) os << "# " << k << " = " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      if (const auto* d = std::get_if<double>(&row[i])) os << format_number(*d);
      else os << std::get<std::string>(row[i]);
    }
    os << '\n';
  }
}

inline Json to_json(const Table& t) {
  Json j;
  j["schema"] = kSchema;
  j["kind"] = t.kind;
  Json meta = Json::object();
  for (const auto& [k, v] : t.meta) meta[k] = v;
  j["meta"] = meta;
  j["columns"] = t.columns;
  Json rows = Json::array();
  for (const auto& row : t.rows) {
    Json r = Json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (const auto* d = std::get_if<double>(&row[i])) {
        r[t.columns[i]] = std::isfinite(*d) ? Json(*d) : Json(nullptr);
      } else {
        r[t.columns[i]] = std::get<std::string>(row[i]);
      }
    }
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

inline void write_json(const Table& t, std::ostream& os) { os << to_json(t).dump(2) << '\n'; }

inline void write(const Table& t, Format f, std::ostream& os) {
  if (f == Format::csv) write_csv(t, os);
  else write_json(t, os);
}

}  // namespace invis::io
