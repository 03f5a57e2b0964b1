#ifndef CENTROID_TOOLS_CLI_OUTPUT_HPP
#define CENTROID_TOOLS_CLI_OUTPUT_HPP

#include <cmath>
#include <cstdio>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

#include "centroid/stepfn.hpp"
#include "json.hpp"

namespace centroid::cli {

using nlohmann::json;

inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// JSON writer with every float at 17 significant digits.
inline void write_json(std::ostream& out, const json& j, int indent = 2, int depth = 0) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) { out << "{}"; return; }
      out << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << pad << json(it.key()).dump() << ": ";
        write_json(out, it.value(), indent, depth + 1);
      }
      out << "\n" << close << "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) { out << "[]"; return; }
      bool scalars = true;
      for (const auto& e : j) scalars = scalars && e.is_primitive();
      if (scalars) {
        out << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out << ", ";
          write_json(out, j[i], indent, depth + 1);
        }
        out << "]";
        return;
      }
      out << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out << ",\n";
        out << pad;
        write_json(out, j[i], indent, depth + 1);
      }
      out << "\n" << close << "]";
      return;
    }
    case json::value_t::number_float:
      out << format_double(j.get<double>());
      return;
    default:
      out << j.dump();
  }
}

inline json to_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(Vector(m.row(r).transpose())));
  return rows;
}

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline LogLevel& log_level() {
  static LogLevel level = LogLevel::Warn;
  return level;
}

inline void log(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::cerr << "centroid[" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

}  // namespace centroid::cli

#endif  // CENTROID_TOOLS_CLI_OUTPUT_HPP
