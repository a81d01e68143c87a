#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fowler {

// Flat key = value configuration file. Blank lines and lines starting with
// '#' are skipped. Validation is against an explicit key schema so a typo
// fails loudly with the offending key named.
class Config {
 public:
  static Config parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
  }

  static Config parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      const size_t eq = t.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("config: line " + std::to_string(lineno) + " is not 'key = value'");
      const std::string key = trim(t.substr(0, eq));
      const std::string val = trim(t.substr(eq + 1));
      if (key.empty()) throw std::runtime_error("config: empty key on line " + std::to_string(lineno));
      if (cfg.values_.count(key)) throw std::runtime_error("config: duplicate key '" + key + "'");
      cfg.values_[key] = val;
    }
    return cfg;
  }

  void restrict_keys(const std::set<std::string>& allowed) const {
    for (const auto& [k, v] : values_)
      if (!allowed.count(k)) throw std::runtime_error("config: unknown key '" + k + "'");
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      size_t pos = 0;
      double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw std::runtime_error("config: key '" + key + "' is not a number: " + it->second);
    }
  }

  int get_int(const std::string& key, int fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      size_t pos = 0;
      int v = std::stoi(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw std::runtime_error("config: key '" + key + "' is not an integer: " + it->second);
    }
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw std::runtime_error("config: key '" + key + "' is not a boolean: " + it->second);
  }

  // comma or space separated list of integers
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<int> out;
    std::string item;
    std::istringstream ss(it->second);
    while (std::getline(ss, item, ',')) {
      std::istringstream ws(item);
      std::string tok;
      while (ws >> tok) {
        try {
          out.push_back(std::stoi(tok));
        } catch (...) {
          throw std::runtime_error("config: key '" + key + "' has a non-integer entry: " + tok);
        }
      }
    }
    if (out.empty()) throw std::runtime_error("config: key '" + key + "' is an empty list");
    return out;
  }

  std::vector<double> get_double_list(const std::string& key, const std::vector<double>& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::string item;
    std::istringstream ss(it->second);
    while (std::getline(ss, item, ',')) {
      std::istringstream ws(item);
      std::string tok;
      while (ws >> tok) {
        try {
          out.push_back(std::stod(tok));
        } catch (...) {
          throw std::runtime_error("config: key '" + key + "' has a non-numeric entry: " + tok);
        }
      }
    }
    if (out.empty()) throw std::runtime_error("config: key '" + key + "' is an empty list");
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }

  std::map<std::string, std::string> values_;
};

}  // namespace fowler
