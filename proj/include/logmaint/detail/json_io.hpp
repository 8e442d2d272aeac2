#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include <nlohmann/json.hpp>

#include "logmaint/error.hpp"

namespace logmaint {

using Json = nlohmann::ordered_json;

namespace detail {

/// %.17g rendering; every double round-trips and output is byte-stable.
inline std::string format_double(double v) {
  if (!std::isfinite(v)) throw Error("cannot serialize non-finite number");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void dump_json(const Json& j, std::string& out, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      break;
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        break;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += Json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump_json(it.value(), out, indent, depth + 1);
      }
      newline(depth);
      out += '}';
      break;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        break;
      }
      // Arrays of scalars stay on one line even in indented mode.
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += indent >= 0 && flat ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        dump_json(e, out, indent, depth + 1);
      }
      if (!flat) newline(depth);
      out += ']';
      break;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Serializes with 17 significant digits for floats. indent < 0 is compact.
inline std::string to_json_text(const Json& j, int indent = -1) {
  std::string out;
  detail::dump_json(j, out, indent, 0);
  return out;
}

}  // namespace logmaint
