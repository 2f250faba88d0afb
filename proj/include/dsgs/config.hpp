#pragma once

#include <map>
#include <string>
#include <vector>

#include "dsgs/types.hpp"

namespace dsgs {

// Sectioned key-value text config:
//   [section]
//   key = value    # comment
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get_str(const std::string& section, const std::string& key,
                      const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<int> get_int_list(const std::string& section, const std::string& key,
                                const std::vector<int>& fallback) const;

  void set(const std::string& section, const std::string& key, const std::string& value);

  std::string dump() const;

  // Keys that were present in the file but never read — typo detection.
  std::vector<std::string> unused_keys() const;

 private:
  std::map<std::string, std::map<std::string, std::string>> data_;
  mutable std::map<std::string, int> touched_;
};

}  // namespace dsgs
