#pragma once

// Strict reading of JSON objects: every key must be consumed, and errors name
// the dotted path of the offending field.

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "pkmc/format_error.hpp"

namespace pkmc::detail {

using Json = nlohmann::ordered_json;

inline std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

/// Parses `text`, reporting the line of a syntax error.
inline Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') ++line;
    }
    throw FormatError(source + ":" + std::to_string(line) + ": syntax error: " + e.what());
  }
}

class Fields {
 public:
  Fields(const Json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) {
      throw FormatError("field '" + (path_.empty() ? std::string("<root>") : path_) + "': expected an object");
    }
  }

  bool has(const std::string& key) const { return node_.contains(key); }
  std::string path(const std::string& key) const { return join_path(path_, key); }

  const Json& get(const std::string& key) {
    auto it = node_.find(key);
    if (it == node_.end()) {
      throw FormatError("missing field '" + path(key) + "'");
    }
    used_.insert(key);
    return *it;
  }

  double number(const std::string& key) {
    const Json& v = get(key);
    if (!v.is_number()) throw FormatError("field '" + path(key) + "': expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  long long integer(const std::string& key) {
    const Json& v = get(key);
    if (!v.is_number_integer()) throw FormatError("field '" + path(key) + "': expected an integer");
    return v.get<long long>();
  }
  long long integer(const std::string& key, long long fallback) { return has(key) ? integer(key) : fallback; }

  std::size_t count(const std::string& key) {
    const long long v = integer(key);
    if (v < 0) throw FormatError("field '" + path(key) + "': expected a nonnegative integer");
    return static_cast<std::size_t>(v);
  }
  std::size_t count(const std::string& key, std::size_t fallback) { return has(key) ? count(key) : fallback; }

  bool boolean(const std::string& key) {
    const Json& v = get(key);
    if (!v.is_boolean()) throw FormatError("field '" + path(key) + "': expected true or false");
    return v.get<bool>();
  }
  bool boolean(const std::string& key, bool fallback) { return has(key) ? boolean(key) : fallback; }

  std::string string(const std::string& key) {
    const Json& v = get(key);
    if (!v.is_string()) throw FormatError("field '" + path(key) + "': expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  const Json& array(const std::string& key) {
    const Json& v = get(key);
    if (!v.is_array()) throw FormatError("field '" + path(key) + "': expected an array");
    return v;
  }

  Fields object(const std::string& key) { return Fields(get(key), path(key)); }

  /// Rejects keys that were never read.
  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!used_.count(it.key())) {
        throw FormatError("unknown field '" + path(it.key()) + "'");
      }
    }
  }

  /// Wraps conversion errors thrown by `fn` (e.g. bad enum names) with the field path.
  template <class Fn>
  auto convert(const std::string& key, Fn fn) -> decltype(fn(std::string())) {
    const std::string value = string(key);
    try {
      return fn(value);
    } catch (const std::invalid_argument& e) {
      throw FormatError("field '" + path(key) + "': " + e.what());
    }
  }

 private:
  const Json& node_;
  std::string path_;
  std::set<std::string> used_;
};

inline double element_number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw FormatError("field '" + path + "': expected a number");
  return v.get<double>();
}

}  // namespace pkmc::detail
