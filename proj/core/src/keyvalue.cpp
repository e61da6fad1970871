#include "znet/keyvalue.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace znet {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

KeyValueFile KeyValueFile::parse_text(const std::string& text,
                                      const std::string& origin) {
  KeyValueFile kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParseError(origin + ":" + std::to_string(lineno) +
                       ": expected 'key = value', got '" + t + "'");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ParseError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    kv.set(key, value);
  }
  return kv;
}

int KeyValueFile::find(const std::string& key) const {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].first == key) return static_cast<int>(i);
  }
  return -1;
}

bool KeyValueFile::has(const std::string& key) const { return find(key) >= 0; }

const std::string& KeyValueFile::get(const std::string& key) const {
  const int i = find(key);
  if (i < 0) throw ParseError(origin_ + ": missing key '" + key + "'");
  return items_[i].second;
}

std::string KeyValueFile::get_or(const std::string& key,
                                 const std::string& fallback) const {
  const int i = find(key);
  return i < 0 ? fallback : items_[i].second;
}

long KeyValueFile::as_int(const std::string& key) const {
  const std::string& v = get(key);
  char* end = nullptr;
  const long r = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    throw ParseError(origin_ + ": key '" + key + "' is not an integer: '" + v + "'");
  }
  return r;
}

long KeyValueFile::as_int_or(const std::string& key, long fallback) const {
  return has(key) ? as_int(key) : fallback;
}

double KeyValueFile::as_double(const std::string& key) const {
  const std::string& v = get(key);
  char* end = nullptr;
  const double r = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw ParseError(origin_ + ": key '" + key + "' is not a number: '" + v + "'");
  }
  return r;
}

double KeyValueFile::as_double_or(const std::string& key, double fallback) const {
  return has(key) ? as_double(key) : fallback;
}

bool KeyValueFile::as_bool_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = get(key);
  if (v == "true" || v == "True" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "False" || v == "0" || v == "no") return false;
  throw ParseError(origin_ + ": key '" + key + "' is not a boolean: '" + v + "'");
}

std::vector<double> KeyValueFile::as_double_list(const std::string& key) const {
  std::istringstream in(get(key));
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    char* end = nullptr;
    const double r = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') {
      throw ParseError(origin_ + ": key '" + key + "' has non-numeric item '" + tok +
                       "'");
    }
    out.push_back(r);
  }
  return out;
}

std::vector<std::string> KeyValueFile::as_string_list(const std::string& key) const {
  std::string v = get(key);
  for (auto& ch : v) {
    if (ch == ',') ch = ' ';
  }
  std::istringstream in(v);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
  const int i = find(key);
  if (i >= 0) {
    items_[i].second = value;
  } else {
    items_.emplace_back(key, value);
  }
}

void KeyValueFile::set_int(const std::string& key, long value) {
  set(key, std::to_string(value));
}

void KeyValueFile::set_double(const std::string& key, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  set(key, buf);
}

std::string KeyValueFile::serialize() const {
  std::string out;
  for (const auto& [k, v] : items_) {
    out += k;
    out += " = ";
    out += v;
    out += "\n";
  }
  return out;
}

void KeyValueFile::write_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << serialize();
  if (!out) throw IoError("write to " + path + " failed");
}

}  // namespace znet
