#include "dsgs/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace dsgs {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DsgsError("cannot open config: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_string(ss.str());
}

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw DsgsError("config line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      cfg.data_[section];  // allow empty sections
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw DsgsError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw DsgsError("config line " + std::to_string(lineno) + ": empty key");
    cfg.data_[section][key] = val;
  }
  return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto s = data_.find(section);
  return s != data_.end() && s->second.count(key) > 0;
}

std::string Config::get_str(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
  touched_[section + "." + key] = 1;
  auto s = data_.find(section);
  if (s == data_.end()) return fallback;
  auto k = s->second.find(key);
  return k == s->second.end() ? fallback : k->second;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  std::string v = get_str(section, key, "");
  if (v.empty()) return fallback;
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw DsgsError("config: " + section + "." + key + " is not a number: " + v);
  }
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
  std::string v = get_str(section, key, "");
  if (v.empty()) return fallback;
  try {
    size_t pos = 0;
    int i = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw DsgsError("config: " + section + "." + key + " is not an integer: " + v);
  }
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  std::string v = get_str(section, key, "");
  if (v.empty()) return fallback;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw DsgsError("config: " + section + "." + key + " is not a boolean: " + v);
}

std::vector<int> Config::get_int_list(const std::string& section, const std::string& key,
                                      const std::vector<int>& fallback) const {
  std::string v = get_str(section, key, "");
  if (v.empty()) return fallback;
  std::vector<int> out;
  std::istringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw DsgsError("config: " + section + "." + key + " has a non-integer entry: " + item);
    }
  }
  if (out.empty())
    throw DsgsError("config: " + section + "." + key + " is an empty list");
  return out;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  data_[section][key] = value;
}

std::string Config::dump() const {
  std::ostringstream os;
  for (const auto& [section, kv] : data_) {
    os << "[" << section << "]\n";
    for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
    os << "\n";
  }
  return os.str();
}

std::vector<std::string> Config::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [section, kv] : data_)
    for (const auto& [k, v] : kv)
      if (!touched_.count(section + "." + k)) out.push_back(section + "." + k);
  return out;
}

}  // namespace dsgs
