#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace ecosim::csv {

// Minimal RFC-4180-style reader: header row required, comma separated,
// double quotes around fields containing commas.
class Table {
 public:
  static Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open csv file: " + path);
    Table t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      auto fields = split(line);
      if (first) {
        t.header_ = fields;
        for (size_t i = 0; i < fields.size(); ++i) t.col_index_[fields[i]] = i;
        first = false;
      } else {
        if (fields.size() != t.header_.size())
          throw std::runtime_error("csv row width mismatch in " + path +
                                   " at data row " + std::to_string(t.rows_.size() + 1));
        t.rows_.push_back(std::move(fields));
      }
    }
    if (first) throw std::runtime_error("csv file has no header row: " + path);
    return t;
  }

  size_t row_count() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }

  const std::string& cell(size_t row, const std::string& col) const {
    auto it = col_index_.find(col);
    if (it == col_index_.end())
      throw std::runtime_error("csv missing column '" + col + "'");
    return rows_[row][it->second];
  }

  double num(size_t row, const std::string& col) const {
    const std::string& s = cell(row, col);
    try {
      size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error("csv non-numeric value '" + s + "' in column '" +
                               col + "' row " + std::to_string(row + 1));
    }
  }

  long long integer(size_t row, const std::string& col) const {
    const std::string& s = cell(row, col);
    try {
      size_t pos = 0;
      long long v = std::stoll(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error("csv non-integer value '" + s + "' in column '" +
                               col + "' row " + std::to_string(row + 1));
    }
  }

 private:
  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') { cur += '"'; ++i; }
          else quoted = false;
        } else cur += c;
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else cur += c;
    }
    out.push_back(cur);
    return out;
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::unordered_map<std::string, size_t> col_index_;
};

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open csv file for writing: " + path);
  }

  void row(const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << quote(fields[i]);
    }
    out_ << '\n';
  }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) { if (c == '"') q += "\"\""; else q += c; }
    q += '"';
    return q;
  }
  std::ofstream out_;
};

}  // namespace ecosim::csv
