#pragma once

// Internal line-oriented parsing helpers shared by the file loaders.
// All diagnostics carry "<name>:<line>:" prefixes so the CLI can surface
// them directly.

#include <charconv>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "racegame/errors.hpp"

namespace racegame::detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

[[noreturn]] inline void fail_at(const std::string& name, int line, const std::string& msg) {
  std::ostringstream os;
  os << name << ":" << line << ": " << msg;
  throw ValidationError(os.str());
}

inline double parse_double(std::string_view tok, const std::string& name, int line) {
  const std::string buf(tok);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end == buf.c_str() || *end != '\0') {
    fail_at(name, line, "expected a number, got '" + buf + "'");
  }
  return v;
}

inline long parse_long(std::string_view tok, const std::string& name, int line) {
  long v = 0;
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    fail_at(name, line, "expected an integer, got '" + std::string(tok) + "'");
  }
  return v;
}

// True for blank lines and '#' comments.
inline bool skippable(std::string_view s) {
  const auto t = trim(s);
  return t.empty() || t.front() == '#';
}

}  // namespace racegame::detail
