#pragma once

#include <map>
#include <string>
#include <vector>

namespace tilelab {

// Minimal TOML subset: bare keys, basic strings, numbers, homogeneous or
// nested arrays, [table] headers and [[array-of-table]] headers with dotted
// paths. Covers the family configuration schema; not a general TOML
// implementation.
struct TomlValue {
  enum class Kind { String, Number, Array };
  Kind kind = Kind::Number;
  std::string str;
  double num = 0.0;
  std::vector<TomlValue> arr;
};

struct TomlTable {
  std::map<std::string, TomlValue> values;
  std::map<std::string, TomlTable> tables;
  std::map<std::string, std::vector<TomlTable>> table_arrays;
};

TomlTable toml_parse(const std::string& text);
TomlTable toml_parse_file(const std::string& path);

}  // namespace tilelab
