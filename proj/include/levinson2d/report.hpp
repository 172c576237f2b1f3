#pragma once

// Tabular output shared by the CLI commands: one Table, two writers.
//
// CSV: header row, LF line endings, numbers in shortest round-trip form (at most 17
// significant digits), lists joined with ';', fields quoted only when they need it.
// JSON: {schema_version, config_echo, rows, metadata}; non-finite numbers become null.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

namespace levinson2d {

inline constexpr const char* kSchemaVersion = "1.0.0";

using Cell = std::variant<std::monostate, bool, long, double, std::string, std::vector<double>>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string csv_field(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(long v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
      std::string out = "\"";
      for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
      }
      return out + '"';
    }
    std::string operator()(const std::vector<double>& v) const {
      std::string out;
      for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + format_double(v[i]);
      return out;
    }
  };
  return std::visit(Visitor{}, c);
}

inline nlohmann::ordered_json json_number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

inline nlohmann::ordered_json json_cell(const Cell& c) {
  struct Visitor {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(bool b) const { return b; }
    nlohmann::ordered_json operator()(long v) const { return static_cast<std::int64_t>(v); }
    nlohmann::ordered_json operator()(double v) const { return json_number(v); }
    nlohmann::ordered_json operator()(const std::string& s) const { return s; }
    nlohmann::ordered_json operator()(const std::vector<double>& v) const {
      auto a = nlohmann::ordered_json::array();
      for (double x : v) a.push_back(json_number(x));
      return a;
    }
  };
  return std::visit(Visitor{}, c);
}

inline nlohmann::ordered_json ptree_to_json(const boost::property_tree::ptree& p) {
  if (p.empty()) return p.data();
  auto obj = nlohmann::ordered_json::object();
  for (const auto& [key, child] : p) obj[key] = ptree_to_json(child);
  return obj;
}

}  // namespace detail

inline void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << detail::csv_field(t.columns[i]);
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << detail::csv_field(row[i]);
    os << '\n';
  }
}

inline nlohmann::ordered_json to_json(const Table& t, const boost::property_tree::ptree& config,
                                      const nlohmann::ordered_json& metadata) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["config_echo"] = config.empty() ? nlohmann::ordered_json::object() : detail::ptree_to_json(config);
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = detail::json_cell(row[i]);
    rows.push_back(std::move(obj));
  }
  doc["rows"] = std::move(rows);
  nlohmann::ordered_json meta = metadata;
  meta["columns"] = t.columns;
  doc["metadata"] = std::move(meta);
  return doc;
}

/// nlohmann prints doubles in shortest round-trip form as well.
inline void write_json(std::ostream& os, const Table& t, const boost::property_tree::ptree& config,
                       const nlohmann::ordered_json& metadata) {
  os << to_json(t, config, metadata).dump(2) << '\n';
}

}  // namespace levinson2d
