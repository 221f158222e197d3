#pragma once

#include <charconv>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "harvestsim/error.hpp"

namespace harvestsim::csv {

struct Record {
  std::size_t line = 0;  // 1-based line of the first character of the record
  std::vector<std::string> fields;
};

// RFC-4180 reader. Lines whose first character is '#' and blank lines are
// skipped. Quoted fields may contain separators, doubled quotes and newlines.
inline std::vector<Record> read(std::istream& in) {
  std::vector<Record> out;
  std::string field;
  Record rec;
  std::size_t line = 1;
  bool in_quotes = false;
  bool at_record_start = true;
  bool field_was_quoted = false;
  char c = 0;

  auto end_field = [&] {
    rec.fields.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    bool blank = rec.fields.size() == 1 && rec.fields[0].empty();
    if (!blank) out.push_back(std::move(rec));
    rec = Record{};
    at_record_start = true;
  };

  while (in.get(c)) {
    if (at_record_start) {
      at_record_start = false;
      rec.line = line;
      if (c == '#') {
        std::string skipped;
        std::getline(in, skipped);
        ++line;
        at_record_start = true;
        continue;
      }
    }
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted)
          throw Error(Errc::parse, "stray quote in unquoted field at line " + std::to_string(line));
        in_quotes = true;
        field_was_quoted = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field.push_back(c);
    }
  }
  if (in_quotes) throw Error(Errc::parse, "unterminated quoted field at end of input");
  if (!at_record_start) end_record();
  return out;
}

inline bool needs_quotes(std::string_view s) {
  return s.find_first_of(",\"\r\n") != std::string_view::npos;
}

inline std::string escape(std::string_view s) {
  if (!needs_quotes(s)) return std::string(s);
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q.push_back('"');
    q.push_back(c);
  }
  q.push_back('"');
  return q;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

// Shortest representation that parses back to the identical double.
inline std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

inline std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace harvestsim::csv
