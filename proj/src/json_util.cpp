#include "sal/json_util.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "sal/error.hpp"

namespace sal {
namespace {

void emit(const ordered_json& v, std::string& out, int indent);

void emit_number(double d, std::string& out) {
  if (!std::isfinite(d)) throw Error("dump_json: non-finite number");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  out += buf;
}

bool is_scalar(const ordered_json& v) { return !v.is_object() && !v.is_array(); }

void newline(std::string& out, int indent) {
  out += '\n';
  out.append(static_cast<std::size_t>(indent), ' ');
}

void emit(const ordered_json& v, std::string& out, int indent) {
  switch (v.type()) {
    case ordered_json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(out, indent + 2);
        out += ordered_json(it.key()).dump();
        out += ": ";
        emit(it.value(), out, indent + 2);
      }
      newline(out, indent);
      out += '}';
      return;
    }
    case ordered_json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      bool flat = true;
      for (const auto& e : v) flat = flat && is_scalar(e);
      bool numeric_rows = true;  // matrix rows stay one per line
      for (const auto& e : v) {
        if (!e.is_array()) {
          numeric_rows = false;
          break;
        }
        for (const auto& x : e) numeric_rows = numeric_rows && is_scalar(x);
      }
      out += '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) newline(out, indent + 2);
        if (numeric_rows) {
          out += '[';
          bool f2 = true;
          for (const auto& x : e) {
            if (!f2) out += ", ";
            f2 = false;
            emit(x, out, 0);
          }
          out += ']';
        } else {
          emit(e, out, indent + 2);
        }
      }
      if (!flat) newline(out, indent);
      out += ']';
      return;
    }
    case ordered_json::value_t::number_float:
      emit_number(v.get<double>(), out);
      return;
    default:
      out += v.dump();
      return;
  }
}

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

std::string dump_json(const ordered_json& value) {
  std::string out;
  emit(value, out, 0);
  out += '\n';
  return out;
}

ordered_json parse_json_strict(const std::string& text, const std::string& origin) {
  std::vector<std::set<std::string>> keys;
  std::string duplicate;
  const ordered_json::parser_callback_t cb = [&](int, ordered_json::parse_event_t ev, ordered_json& parsed) {
    switch (ev) {
      case ordered_json::parse_event_t::object_start:
        keys.emplace_back();
        break;
      case ordered_json::parse_event_t::object_end:
        if (!keys.empty()) keys.pop_back();
        break;
      case ordered_json::parse_event_t::key: {
        const std::string k = parsed.get<std::string>();
        if (!keys.empty() && !keys.back().insert(k).second && duplicate.empty()) duplicate = k;
        break;
      }
      default:
        break;
    }
    return true;
  };
  ordered_json j;
  try {
    j = ordered_json::parse(text, cb);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw Error(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON parse error: " + e.what());
  }
  if (!duplicate.empty()) throw Error(origin + ": duplicate key '" + duplicate + "'");
  return j;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  out.close();
  if (!out) throw Error("error writing '" + path + "'");
}

}  // namespace sal
