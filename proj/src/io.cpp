#include "rallyviz/io.h"

#include <zlib.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rallyviz/error.h"
#include "rallyviz/hash.h"

namespace rallyviz {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string gunzip(const std::string& path) {
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) throw Error(ErrorCode::Io, "cannot open " + path);
  std::string out;
  char buf[1 << 15];
  int n = 0;
  while ((n = gzread(file, buf, sizeof buf)) > 0) out.append(buf, static_cast<size_t>(n));
  const bool bad = n < 0;
  gzclose(file);
  if (bad) throw Error(ErrorCode::Io, "corrupt gzip stream in " + path);
  return out;
}

}  // namespace

std::string hex64(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = kDigits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::string read_file(const std::string& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::Io, "file not found: " + path);
  if (ends_with(path, ".gz")) return gunzip(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << contents;
}

nlohmann::json read_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Validation, path + ": malformed JSON: " + e.what());
  }
}

std::string dump_canonical(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void require_schema(const nlohmann::json& doc, int expected, const char* what) {
  if (!doc.is_object() || !doc.contains("schema_version"))
    fail(std::string(what) + ": missing schema_version");
  const auto& v = doc.at("schema_version");
  if (!v.is_number_integer() || v.get<int>() != expected)
    fail(std::string(what) + ": unsupported schema_version " + v.dump() + " (expected " +
         std::to_string(expected) + ")");
}

}  // namespace rallyviz
