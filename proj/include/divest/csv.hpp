#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "divest/sample_set.hpp"

namespace divest {

/// Shortest text that reads back to the same double ("%.17g"), "nan"/"inf" otherwise.
std::string format_double(double x);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_escape(const std::string& field);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

/// One point per row, comma separated. A first line that does not parse as
/// numbers is taken as a header. Blank lines are skipped; ragged rows throw.
SampleSet read_points_csv(const std::string& path);
SampleSet parse_points_csv(std::istream& in, const std::string& source);

void write_points_csv(std::ostream& out, const SampleSet& s);

}  // namespace divest
