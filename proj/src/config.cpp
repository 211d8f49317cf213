#include "arlhom/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace arlhom {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

double KeyValueConfig::parse_number(const std::string& s) {
  const auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      const double num = std::stod(trim(s.substr(0, slash)));
      const double den = std::stod(trim(s.substr(slash + 1)));
      if (den == 0) throw std::invalid_argument("zero denominator");
      return num / den;
    }
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (trim(s.substr(pos)).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid config: cannot parse number '" + s + "'");
  }
}

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("invalid config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

KeyValueConfig KeyValueConfig::from_text(const std::string& text) {
  KeyValueConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    c.raw_lines_.push_back(line);
    const auto hash = line.find('#');
    std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("invalid config: line " + std::to_string(lineno) +
                                  " is not 'key = value'");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string val = trim(body.substr(eq + 1));
    if (key.empty() || val.empty()) {
      throw std::invalid_argument("invalid config: empty key or value at line " +
                                  std::to_string(lineno));
    }
    if (c.kv_.count(key)) {
      throw std::invalid_argument("invalid config: duplicate key '" + key + "'");
    }
    c.kv_[key] = val;
  }
  return c;
}

bool KeyValueConfig::has(const std::string& key) const {
  used_.insert(key);
  return kv_.count(key) > 0;
}

std::string KeyValueConfig::get_str(const std::string& key, const std::string& def) const {
  used_.insert(key);
  const auto it = kv_.find(key);
  return it == kv_.end() ? def : it->second;
}

std::string KeyValueConfig::require_str(const std::string& key) const {
  used_.insert(key);
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw std::invalid_argument("invalid config: missing key '" + key + "'");
  return it->second;
}

double KeyValueConfig::get_num(const std::string& key, double def) const {
  used_.insert(key);
  const auto it = kv_.find(key);
  return it == kv_.end() ? def : parse_number(it->second);
}

double KeyValueConfig::require_num(const std::string& key) const {
  return parse_number(require_str(key));
}

long long KeyValueConfig::get_int(const std::string& key, long long def) const {
  const double v = get_num(key, static_cast<double>(def));
  const long long i = static_cast<long long>(v);
  if (static_cast<double>(i) != v)
    throw std::invalid_argument("invalid config: '" + key + "' must be an integer");
  return i;
}

bool KeyValueConfig::get_bool(const std::string& key, bool def) const {
  used_.insert(key);
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("invalid config: '" + key + "' must be a boolean");
}

std::vector<double> KeyValueConfig::get_num_list(const std::string& key,
                                                 const std::vector<double>& def) const {
  used_.insert(key);
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  std::vector<double> out;
  std::string item;
  std::istringstream ss(it->second);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number(item));
  }
  if (out.empty()) throw std::invalid_argument("invalid config: empty list for '" + key + "'");
  return out;
}

std::vector<std::string> KeyValueConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : kv_)
    if (!used_.count(k)) out.push_back(k);
  return out;
}

std::vector<std::string> KeyValueConfig::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : kv_) out.push_back(k);
  return out;
}

}  // namespace arlhom
