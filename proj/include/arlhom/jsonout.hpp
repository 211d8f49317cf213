#pragma once

#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace arlhom {

/// Small ordered JSON emitter. Floating-point values are written with 17
/// significant digits so results replay bit-exactly.
class Json {
 public:
  enum class Type { Null, Bool, Int, Num, Str, Arr, Obj };

  Json() = default;
  static Json object() { Json j; j.type_ = Type::Obj; return j; }
  static Json array() { Json j; j.type_ = Type::Arr; return j; }
  static Json num(double v) { Json j; j.type_ = Type::Num; j.num_ = v; return j; }
  static Json integer(long long v) { Json j; j.type_ = Type::Int; j.int_ = v; return j; }
  static Json str(std::string s) { Json j; j.type_ = Type::Str; j.str_ = std::move(s); return j; }
  static Json boolean(bool b) { Json j; j.type_ = Type::Bool; j.bool_ = b; return j; }

  Json& set(const std::string& key, Json v) {
    keys_.push_back(key);
    members_.push_back(std::move(v));
    return *this;
  }
  Json& push(Json v) {
    members_.push_back(std::move(v));
    return *this;
  }
  template <class Iterable>
  static Json num_array(const Iterable& xs) {
    Json a = array();
    for (const auto& x : xs) a.push(num(static_cast<double>(x)));
    return a;
  }
  template <class Iterable>
  static Json int_array(const Iterable& xs) {
    Json a = array();
    for (const auto& x : xs) a.push(integer(static_cast<long long>(x)));
    return a;
  }

  std::string dump(int indent = 2) const {
    std::string out;
    write(out, indent, 0);
    out.push_back('\n');
    return out;
  }

 private:
  static std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    // JSON has no infinities or NaN
    if (s.find("inf") != std::string::npos || s.find("nan") != std::string::npos) return "null";
    return s;
  }
  static void escape(std::string& out, const std::string& s) {
    out.push_back('"');
    for (char c : s) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", c);
            out += buf;
          } else {
            out.push_back(c);
          }
      }
    }
    out.push_back('"');
  }
  void write(std::string& out, int indent, int depth) const {
    const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
    const std::string pad0(static_cast<std::size_t>(indent) * depth, ' ');
    switch (type_) {
      case Type::Null: out += "null"; break;
      case Type::Bool: out += bool_ ? "true" : "false"; break;
      case Type::Int: out += std::to_string(int_); break;
      case Type::Num: out += fmt_double(num_); break;
      case Type::Str: escape(out, str_); break;
      case Type::Arr: {
        if (members_.empty()) { out += "[]"; break; }
        out += "[\n";
        for (std::size_t i = 0; i < members_.size(); ++i) {
          out += pad;
          members_[i].write(out, indent, depth + 1);
          out += i + 1 < members_.size() ? ",\n" : "\n";
        }
        out += pad0 + "]";
        break;
      }
      case Type::Obj: {
        if (members_.empty()) { out += "{}"; break; }
        out += "{\n";
        for (std::size_t i = 0; i < members_.size(); ++i) {
          out += pad;
          escape(out, keys_[i]);
          out += ": ";
          members_[i].write(out, indent, depth + 1);
          out += i + 1 < members_.size() ? ",\n" : "\n";
        }
        out += pad0 + "}";
        break;
      }
    }
  }

  Type type_ = Type::Null;
  bool bool_ = false;
  long long int_ = 0;
  double num_ = 0;
  std::string str_;
  std::vector<std::string> keys_;
  std::vector<Json> members_;
};

}  // namespace arlhom
