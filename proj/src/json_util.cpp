#include "json_util.hpp"

#include <atomic>
#include <fstream>
#include <iterator>
#include <sstream>
#include <system_error>

namespace btx::detail {

namespace {

// Char iterator that publishes how many characters the parser consumed.
struct CountingIter {
  using iterator_category = std::forward_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  const char* ptr = nullptr;
  const char* base = nullptr;
  std::size_t* consumed = nullptr;

  reference operator*() const { return *ptr; }
  CountingIter& operator++() {
    ++ptr;
    *consumed = static_cast<std::size_t>(ptr - base);
    return *this;
  }
  CountingIter operator++(int) {
    CountingIter old = *this;
    ++*this;
    return old;
  }
  bool operator==(const CountingIter& other) const { return ptr == other.ptr; }
  bool operator!=(const CountingIter& other) const { return ptr != other.ptr; }
};

class PositionSax : public nlohmann::detail::json_sax_dom_parser<Json> {
 public:
  PositionSax(Json& root, const std::size_t* consumed, std::vector<std::size_t>* starts)
      : json_sax_dom_parser(root, true), consumed_(consumed), starts_(starts) {}

  bool start_object(std::size_t len) {
    starts_->push_back(*consumed_ == 0 ? 0 : *consumed_ - 1);
    return json_sax_dom_parser::start_object(len);
  }
  bool start_array(std::size_t len) {
    starts_->push_back(*consumed_ == 0 ? 0 : *consumed_ - 1);
    return json_sax_dom_parser::start_array(len);
  }

 private:
  const std::size_t* consumed_;
  std::vector<std::size_t>* starts_;
};

}  // namespace

JsonDoc::JsonDoc(std::string_view text, std::string source, ErrorKind kind)
    : text_(text), source_(std::move(source)), kind_(kind) {
  std::size_t consumed = 0;
  CountingIter first{text_.data(), text_.data(), &consumed};
  CountingIter last{text_.data() + text_.size(), text_.data(), &consumed};
  PositionSax sax(root_, &consumed, &starts_);
  try {
    Json::sax_parse(first, last, &sax);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t offset = e.byte == 0 ? 0 : e.byte - 1;
    auto [line, col] = line_col(std::min(offset, text_.size()));
    std::string message = e.what();
    // Drop nlohmann's "[json.exception.parse_error.101] parse error at line x, column y: "
    if (auto colon = message.find(": "); colon != std::string::npos)
      message = message.substr(colon + 2);
    if (kind_ == ErrorKind::Parse) throw ParseError(source_, line, col, message);
    throw SchemaError(source_, line, col, message);
  }
  std::size_t next = 0;
  index(root_, next);
}

void JsonDoc::index(const Json& node, std::size_t& next) {
  if (!node.is_structured()) return;
  if (next < starts_.size()) offsets_[&node] = starts_[next];
  ++next;
  for (const auto& child : node) index(child, next);
}

std::pair<std::size_t, std::size_t> JsonDoc::line_col(std::size_t offset) const {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text_.size(); ++i) {
    if (text_[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

std::pair<std::size_t, std::size_t> JsonDoc::position(const Json& node) const {
  auto it = offsets_.find(&node);
  if (it == offsets_.end()) return {0, 0};
  return line_col(it->second);
}

void JsonDoc::fail(const Json& node, const std::string& message) const {
  auto [line, col] = position(node);
  if (kind_ == ErrorKind::Parse) throw ParseError(source_, line, col, message);
  throw SchemaError(source_, line, col, message);
}

void JsonDoc::expect_object(const Json& node, const char* what) const {
  if (!node.is_object()) fail(node, std::string("expected ") + what + " object");
}

const Json& JsonDoc::member(const Json& object, const char* key) const {
  expect_object(object, "an");
  auto it = object.find(key);
  if (it == object.end()) fail(object, std::string("missing required key \"") + key + "\"");
  return *it;
}

const Json* JsonDoc::optional_member(const Json& object, const char* key) const {
  expect_object(object, "an");
  auto it = object.find(key);
  return it == object.end() ? nullptr : &*it;
}

std::string JsonDoc::string_member(const Json& object, const char* key) const {
  const Json& value = member(object, key);
  if (!value.is_string()) fail(object, std::string("key \"") + key + "\" must be a string");
  return value.get<std::string>();
}

std::string JsonDoc::string_or(const Json& object, const char* key, std::string fallback) const {
  const Json* value = optional_member(object, key);
  if (value == nullptr) return fallback;
  if (!value->is_string()) fail(object, std::string("key \"") + key + "\" must be a string");
  return value->get<std::string>();
}

const Json& JsonDoc::array_member(const Json& object, const char* key) const {
  const Json& value = member(object, key);
  if (!value.is_array()) fail(object, std::string("key \"") + key + "\" must be an array");
  return value;
}

const Json& JsonDoc::object_member(const Json& object, const char* key) const {
  const Json& value = member(object, key);
  if (!value.is_object()) fail(object, std::string("key \"") + key + "\" must be an object");
  return value;
}

void JsonDoc::expect_format(const char* format, int max_version) const {
  expect_object(root_, "a top-level");
  std::string actual = string_member(root_, "format");
  if (actual != format) fail(root_, std::string("expected format \"") + format + "\", got \"" + actual + "\"");
  const Json& version = member(root_, "version");
  if (!version.is_number_integer() || version.get<int>() < 1 || version.get<int>() > max_version)
    fail(root_, "unsupported version (supported: 1.." + std::to_string(max_version) + ")");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Schema, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  static std::atomic<unsigned> counter{0};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp" + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Internal, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::Internal, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(ErrorKind::Internal, "cannot rename onto " + path.string() + ": " + ec.message());
  }
}

}  // namespace btx::detail
