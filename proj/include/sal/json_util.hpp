#pragma once

#include <string>

#include "json.hpp"

namespace sal {

using ordered_json = nlohmann::ordered_json;

/// Deterministic JSON text: objects one key per line with two-space indent,
/// arrays of scalars on a single line, floating-point numbers with 17
/// significant digits ("%.17g"). Non-finite numbers are rejected.
std::string dump_json(const ordered_json& value);

/// Parses JSON, rejecting duplicate object keys. Errors carry line:column.
ordered_json parse_json_strict(const std::string& text, const std::string& origin);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace sal
