#pragma once

#include <string>

#include "json.hpp"

namespace rallyviz {

/// Reads a whole file. Files ending in ".gz" are inflated transparently.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

nlohmann::json read_json(const std::string& path);

/// Canonical JSON text: 2-space indent, keys sorted, trailing newline.
std::string dump_canonical(const nlohmann::json& j);

/// Throws Error(Validation) unless doc["schema_version"] == expected.
void require_schema(const nlohmann::json& doc, int expected, const char* what);

}  // namespace rallyviz
