#pragma once

#include <map>
#include <set>
#include <string>

namespace rsdf {

/// Flat key = value document. Lines are `key = value`; `#` starts a comment.
/// Commands namespace their keys with a dotted prefix (e.g. train.iterations).
class Config {
 public:
  static Config load(const std::string& path);   // throws naming the file
  static Config parse(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::set<std::string> keys() const;

  // Hard error when the file contains a key outside the known set.
  void require_known(const std::set<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace rsdf
