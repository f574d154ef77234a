#include "tilelab/toml.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tilelab {

namespace {

struct TomlParser {
  const std::string& s;
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& what) const {
    size_t line = 1;
    for (size_t i = 0; i < pos && i < s.size(); ++i)
      if (s[i] == '\n') ++line;
    throw std::runtime_error("toml parse error, line " + std::to_string(line) + ": " + what);
  }

  void skip_ws_and_comments(bool stop_at_newline) {
    while (pos < s.size()) {
      const char c = s[pos];
      if (c == '#') {
        while (pos < s.size() && s[pos] != '\n') ++pos;
      } else if (c == '\n') {
        if (stop_at_newline) return;
        ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        return;
      }
    }
  }

  bool at_end() {
    skip_ws_and_comments(false);
    return pos >= s.size();
  }

  std::string parse_bare_key() {
    skip_ws_and_comments(false);
    const size_t start = pos;
    while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) ||
                              s[pos] == '_' || s[pos] == '-'))
      ++pos;
    if (pos == start) fail("expected key");
    return s.substr(start, pos - start);
  }

  std::vector<std::string> parse_dotted_path() {
    std::vector<std::string> path{parse_bare_key()};
    while (pos < s.size() && s[pos] == '.') {
      ++pos;
      path.push_back(parse_bare_key());
    }
    return path;
  }

  TomlValue parse_string() {
    TomlValue v;
    v.kind = TomlValue::Kind::String;
    ++pos;  // opening quote
    while (pos < s.size() && s[pos] != '"') {
      char c = s[pos];
      if (c == '\n') fail("newline in string");
      if (c == '\\') {
        ++pos;
        if (pos >= s.size()) fail("dangling escape");
        switch (s[pos]) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail("unsupported escape");
        }
      }
      v.str.push_back(c);
      ++pos;
    }
    if (pos >= s.size()) fail("unterminated string");
    ++pos;
    return v;
  }

  TomlValue parse_number() {
    std::string digits;
    const size_t start = pos;
    while (pos < s.size()) {
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.' ||
          c == 'e' || c == 'E') {
        digits.push_back(c);
        ++pos;
      } else if (c == '_') {
        ++pos;
      } else {
        break;
      }
    }
    char* end = nullptr;
    TomlValue v;
    v.kind = TomlValue::Kind::Number;
    v.num = std::strtod(digits.c_str(), &end);
    if (digits.empty() || end != digits.c_str() + digits.size()) {
      pos = start;
      fail("bad number");
    }
    return v;
  }

  TomlValue parse_array() {
    TomlValue v;
    v.kind = TomlValue::Kind::Array;
    ++pos;  // '['
    for (;;) {
      skip_ws_and_comments(false);
      if (pos >= s.size()) fail("unterminated array");
      if (s[pos] == ']') {
        ++pos;
        return v;
      }
      v.arr.push_back(parse_value());
      skip_ws_and_comments(false);
      if (pos < s.size() && s[pos] == ',') {
        ++pos;
      } else if (pos < s.size() && s[pos] == ']') {
        ++pos;
        return v;
      } else {
        fail("expected ',' or ']' in array");
      }
    }
  }

  TomlValue parse_value() {
    skip_ws_and_comments(false);
    if (pos >= s.size()) fail("expected value");
    const char c = s[pos];
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    return parse_number();
  }

  // Resolve a dotted header path; each intermediate segment may name a plain
  // table or an array of tables (then its last element is entered).
  TomlTable* resolve(TomlTable* root, const std::vector<std::string>& path, size_t upto) {
    TomlTable* cur = root;
    for (size_t i = 0; i < upto; ++i) {
      const std::string& seg = path[i];
      if (auto it = cur->table_arrays.find(seg); it != cur->table_arrays.end()) {
        if (it->second.empty()) fail("empty table array '" + seg + "'");
        cur = &it->second.back();
      } else {
        cur = &cur->tables[seg];
      }
    }
    return cur;
  }

  TomlTable parse_document() {
    TomlTable root;
    TomlTable* current = &root;
    while (!at_end()) {
      if (s[pos] == '[') {
        const bool is_array = pos + 1 < s.size() && s[pos + 1] == '[';
        pos += is_array ? 2 : 1;
        const std::vector<std::string> path = parse_dotted_path();
        skip_ws_and_comments(false);
        if (is_array) {
          if (pos + 1 >= s.size() || s[pos] != ']' || s[pos + 1] != ']') fail("expected ']]'");
          pos += 2;
          TomlTable* parent = resolve(&root, path, path.size() - 1);
          parent->table_arrays[path.back()].emplace_back();
          current = &parent->table_arrays[path.back()].back();
        } else {
          if (pos >= s.size() || s[pos] != ']') fail("expected ']'");
          ++pos;
          TomlTable* parent = resolve(&root, path, path.size() - 1);
          current = &parent->tables[path.back()];
        }
        continue;
      }
      const std::string key = parse_bare_key();
      skip_ws_and_comments(false);
      if (pos >= s.size() || s[pos] != '=') fail("expected '=' after key '" + key + "'");
      ++pos;
      if (current->values.count(key)) fail("duplicate key '" + key + "'");
      current->values[key] = parse_value();
    }
    return root;
  }
};

}  // namespace

TomlTable toml_parse(const std::string& text) {
  TomlParser p{text};
  return p.parse_document();
}

TomlTable toml_parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return toml_parse(buf.str());
}

}  // namespace tilelab
