#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "isac/linalg.hpp"

namespace isac {

/// RFC-style CSV quoting: fields containing commas, quotes or newlines are
/// wrapped in double quotes with embedded quotes doubled.
std::string csv_escape(const std::string& field);

/// Shortest round-trip decimal form of a double (17 significant digits).
std::string csv_num(double v);

void csv_row(std::ostream& os, const std::vector<std::string>& fields);

/// Row-major dump with one "re,im" pair per cell (cells are quoted since
/// they contain commas).
void write_complex_matrix_csv(std::ostream& os, const CMat& m);

}  // namespace isac
