#include "divest/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "divest/error.hpp"

namespace divest {

namespace {

bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::size_t pos = 0;
  while (true) {
    std::size_t end = line.find(',', pos);
    std::string cell = line.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    std::size_t a = cell.find_first_not_of(" \t\r");
    std::size_t b = cell.find_last_not_of(" \t\r");
    if (a == std::string::npos) return false;
    cell = cell.substr(a, b - a + 1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) return false;
    out.push_back(v);
    if (end == std::string::npos) return true;
    pos = end + 1;
  }
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(fields[i]);
  }
  out << '\n';
}

SampleSet parse_points_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::vector<double> values, row;
  std::size_t dim = 0;
  std::size_t line_no = 0;
  bool seen_first = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    bool ok = parse_row(line, row);
    if (!seen_first) {
      seen_first = true;
      if (!ok) continue;  // header
    }
    if (!ok) throw Error(source + ":" + std::to_string(line_no) + ": not a row of numbers");
    for (double v : row)
      if (!std::isfinite(v)) throw Error(source + ":" + std::to_string(line_no) + ": non-finite value");
    if (dim == 0) dim = row.size();
    if (row.size() != dim)
      throw Error(source + ":" + std::to_string(line_no) + ": row has " + std::to_string(row.size()) +
                  " columns, expected " + std::to_string(dim));
    values.insert(values.end(), row.begin(), row.end());
  }
  if (dim == 0) throw Error(source + ": no data rows");
  return SampleSet(dim, std::move(values), source);
}

SampleSet read_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return parse_points_csv(in, path);
}

void write_points_csv(std::ostream& out, const SampleSet& s) {
  for (std::size_t i = 0; i < s.rows(); ++i) {
    auto r = s.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out << ',';
      out << format_double(r[j]);
    }
    out << '\n';
  }
}

}  // namespace divest
