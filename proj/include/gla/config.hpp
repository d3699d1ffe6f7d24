#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "gla/errors.hpp"

namespace gla {

// Line-oriented configuration format:
//
//   schema = gla-config-1
//   [section]
//   key = value          # trailing comments allowed
//
// Values are scalars, booleans, or comma-separated lists. Every key present in
// the file must be consumed by the loader; assert_fully_consumed() throws on
// leftovers so typos fail fast instead of being silently ignored.
class Config {
 public:
  static constexpr const char* kSchema = "gla-config-1";

  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;

  double get_number(const std::string& section, const std::string& key) const;
  double get_number_or(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key) const;
  int get_int_or(const std::string& section, const std::string& key, int fallback) const;
  bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;
  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const;
  // Comma-separated list of numbers: "1.0, 2.5, 3".
  std::vector<double> get_number_list(const std::string& section, const std::string& key) const;
  // Comma-separated list of space-separated pairs: "0.165 0.0455, 0.335 0.3".
  std::vector<std::pair<double, double>> get_pair_list(const std::string& section,
                                                       const std::string& key) const;

  // Throws ConfigError naming every key that was never read.
  void assert_fully_consumed() const;

  const std::string& origin() const { return origin_; }

 private:
  std::string lookup(const std::string& section, const std::string& key) const;
  const std::string* try_lookup(const std::string& section, const std::string& key) const;

  std::string origin_;
  std::map<std::string, std::string> values_;  // "section.key" -> raw text
  mutable std::set<std::string> consumed_;
};

}  // namespace gla
