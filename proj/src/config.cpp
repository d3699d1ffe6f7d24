#include "gla/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gla {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& raw, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(raw.c_str(), &end);
  if (end == raw.c_str() || *end != '\0') {
    throw ConfigError("config: '" + where + "' is not a number: '" + raw + "'");
  }
  return v;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  bool schema_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
      }
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    if (section.empty() && key == "schema") {
      if (value != kSchema) {
        throw ConfigError(origin + ": unsupported schema '" + value + "' (expected '" +
                          kSchema + "')");
      }
      schema_seen = true;
      continue;
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (cfg.values_.count(full)) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + full + "'");
    }
    cfg.values_[full] = value;
  }
  if (!schema_seen) {
    throw ConfigError(origin + ": missing 'schema = " + std::string(kSchema) + "' line");
  }
  return cfg;
}

const std::string* Config::try_lookup(const std::string& section, const std::string& key) const {
  const std::string full = section.empty() ? key : section + "." + key;
  auto it = values_.find(full);
  if (it == values_.end()) return nullptr;
  consumed_.insert(full);
  return &it->second;
}

std::string Config::lookup(const std::string& section, const std::string& key) const {
  const std::string* v = try_lookup(section, key);
  if (!v) {
    throw ConfigError(origin_ + ": missing required key '" + section + "." + key + "'");
  }
  return *v;
}

bool Config::has(const std::string& section, const std::string& key) const {
  return values_.count(section.empty() ? key : section + "." + key) > 0;
}

double Config::get_number(const std::string& section, const std::string& key) const {
  return parse_double(lookup(section, key), section + "." + key);
}

double Config::get_number_or(const std::string& section, const std::string& key,
                             double fallback) const {
  const std::string* v = try_lookup(section, key);
  return v ? parse_double(*v, section + "." + key) : fallback;
}

int Config::get_int(const std::string& section, const std::string& key) const {
  const double v = get_number(section, key);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) {
    throw ConfigError("config: '" + section + "." + key + "' must be an integer");
  }
  return i;
}

int Config::get_int_or(const std::string& section, const std::string& key, int fallback) const {
  if (!has(section, key)) return fallback;
  return get_int(section, key);
}

bool Config::get_bool_or(const std::string& section, const std::string& key, bool fallback) const {
  const std::string* v = try_lookup(section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "on" || *v == "1") return true;
  if (*v == "false" || *v == "off" || *v == "0") return false;
  throw ConfigError("config: '" + section + "." + key + "' must be a boolean, got '" + *v + "'");
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
  return lookup(section, key);
}

std::string Config::get_string_or(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
  const std::string* v = try_lookup(section, key);
  return v ? *v : fallback;
}

std::vector<double> Config::get_number_list(const std::string& section,
                                            const std::string& key) const {
  const std::string raw = lookup(section, key);
  std::vector<double> out;
  std::istringstream in(raw);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_double(item, section + "." + key));
  }
  if (out.empty()) {
    throw ConfigError("config: '" + section + "." + key + "' is an empty list");
  }
  return out;
}

std::vector<std::pair<double, double>> Config::get_pair_list(const std::string& section,
                                                             const std::string& key) const {
  const std::string raw = lookup(section, key);
  std::vector<std::pair<double, double>> out;
  std::istringstream in(raw);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::istringstream pin(item);
    double a = 0.0, b = 0.0;
    if (!(pin >> a >> b)) {
      throw ConfigError("config: '" + section + "." + key +
                        "' entries must be 'coefficient exponent' pairs, got '" + item + "'");
    }
    out.emplace_back(a, b);
  }
  if (out.empty()) {
    throw ConfigError("config: '" + section + "." + key + "' is an empty list");
  }
  return out;
}

void Config::assert_fully_consumed() const {
  std::string leftovers;
  for (const auto& [k, v] : values_) {
    if (!consumed_.count(k)) {
      if (!leftovers.empty()) leftovers += ", ";
      leftovers += k;
    }
  }
  if (!leftovers.empty()) {
    throw ConfigError(origin_ + ": unknown config keys: " + leftovers);
  }
}

}  // namespace gla
