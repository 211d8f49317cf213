#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace arlhom {

/// Flat key-value configuration with dotted section keys, one experiment per
/// file. Lines are `key = value`; `#` starts a comment. Numeric values may
/// be written as fractions (`1/64`). The raw text is kept so every output
/// record can echo the configuration verbatim.
class KeyValueConfig {
 public:
  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_text(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& def) const;
  std::string require_str(const std::string& key) const;
  double get_num(const std::string& key, double def) const;
  double require_num(const std::string& key) const;
  long long get_int(const std::string& key, long long def) const;
  bool get_bool(const std::string& key, bool def) const;
  /// Comma-separated list of numbers (fractions allowed).
  std::vector<double> get_num_list(const std::string& key,
                                   const std::vector<double>& def) const;

  /// Keys that were never read; used to reject typos up front.
  std::vector<std::string> unused_keys() const;
  std::vector<std::string> keys() const;
  const std::vector<std::string>& raw_lines() const { return raw_lines_; }

  static double parse_number(const std::string& s);

 private:
  std::map<std::string, std::string> kv_;
  std::vector<std::string> raw_lines_;
  mutable std::set<std::string> used_;
};

}  // namespace arlhom
