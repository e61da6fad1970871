#pragma once

#include <string>
#include <vector>

#include "znet/errors.hpp"

namespace znet {

// Flat `key = value` text, the grammar shared by MetaImage headers and run
// config files. Keys keep insertion order; '#' starts a comment line; later
// assignments to the same key win.
class KeyValueFile {
 public:
  static KeyValueFile parse_file(const std::string& path);
  static KeyValueFile parse_text(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;  // ParseError if missing
  std::string get_or(const std::string& key, const std::string& fallback) const;

  long as_int(const std::string& key) const;
  long as_int_or(const std::string& key, long fallback) const;
  double as_double(const std::string& key) const;
  double as_double_or(const std::string& key, double fallback) const;
  bool as_bool_or(const std::string& key, bool fallback) const;
  std::vector<double> as_double_list(const std::string& key) const;
  std::vector<std::string> as_string_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  void set_int(const std::string& key, long value);
  void set_double(const std::string& key, double value);

  const std::vector<std::pair<std::string, std::string>>& items() const {
    return items_;
  }

  std::string serialize() const;
  void write_file(const std::string& path) const;

 private:
  int find(const std::string& key) const;
  std::vector<std::pair<std::string, std::string>> items_;
  std::string origin_ = "<memory>";
};

}  // namespace znet
