#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "coldstart/errors.hpp"

namespace coldstart::csv {

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  fields.push_back(field);
  return fields;
}

/// Line-oriented reader; no quoting support (the trace exports never quote).
class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path), path_(path) {
    if (!in_) throw DataError("cannot open CSV file: " + path);
  }

  /// Returns false at EOF. Skips fully empty lines.
  bool next(std::vector<std::string>& fields, long& line_number) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (line.empty() || line == "\r") continue;
      fields = split_line(line);
      line_number = line_;
      return true;
    }
    return false;
  }

  const std::string& path() const { return path_; }

 private:
  std::ifstream in_;
  std::string path_;
  long line_ = 0;
};

long parse_long(const std::string& field, const std::string& path, long line);
double parse_double(const std::string& field, const std::string& path, long line);

}  // namespace coldstart::csv
