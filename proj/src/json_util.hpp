#pragma once

// Internal helpers for the structured-text formats (domain, scenario,
// fixture and tree files). Not installed.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "btx/error.hpp"
#include "json.hpp"

namespace btx::detail {

using Json = nlohmann::ordered_json;

// A parsed JSON document that remembers where each object/array started,
// so schema errors can point at a line and column.
class JsonDoc {
 public:
  JsonDoc(std::string_view text, std::string source, ErrorKind kind);

  const Json& root() const { return root_; }
  const std::string& source() const { return source_; }

  std::pair<std::size_t, std::size_t> position(const Json& node) const;

  [[noreturn]] void fail(const Json& node, const std::string& message) const;

  // Typed accessors that raise positioned errors.
  const Json& member(const Json& object, const char* key) const;
  const Json* optional_member(const Json& object, const char* key) const;
  std::string string_member(const Json& object, const char* key) const;
  std::string string_or(const Json& object, const char* key, std::string fallback) const;
  const Json& array_member(const Json& object, const char* key) const;
  const Json& object_member(const Json& object, const char* key) const;
  void expect_object(const Json& node, const char* what) const;
  void expect_format(const char* format, int max_version) const;

 private:
  std::pair<std::size_t, std::size_t> line_col(std::size_t offset) const;
  void index(const Json& node, std::size_t& next);

  std::string text_;
  std::string source_;
  ErrorKind kind_;
  Json root_;
  std::vector<std::size_t> starts_;
  std::unordered_map<const Json*, std::size_t> offsets_;
};

std::string read_file(const std::filesystem::path& path);

// Write to a sibling temp file, then rename over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace btx::detail
