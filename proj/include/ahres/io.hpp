#pragma once

#include <string>

#include <json.hpp>

namespace ahres {

// JSON text with every float printed as %.17g (non-finite values as null),
// two-space indentation and sorted keys.
std::string dump_json(const nlohmann::json& j);

// Formats a double with 17 significant digits.
std::string fmt17(double x);

// Writes via a temporary file in the same directory and renames over `path`.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace ahres
