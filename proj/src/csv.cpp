#include "isac/csv.hpp"

#include <cstdio>

namespace isac {

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void csv_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << csv_escape(fields[i]);
  }
  os << '\n';
}

void write_complex_matrix_csv(std::ostream& os, const CMat& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<std::string> row;
    row.reserve(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(csv_num(m(i, j).real()) + "," + csv_num(m(i, j).imag()));
    csv_row(os, row);
  }
}

}  // namespace isac
