#include "roughfilter/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace roughfilter::csv {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const Eigen::MatrixXd& rows) {
  if (header.size() != static_cast<size_t>(rows.cols()) && rows.rows() > 0)
    throw std::invalid_argument("write_table: header width does not match data");
  std::ofstream out(path, std::ios::binary);  // binary keeps LF on every platform
  if (!out) throw std::runtime_error("write_table: cannot open " + path);
  for (size_t j = 0; j < header.size(); ++j) {
    if (j) out << ',';
    out << header[j];
  }
  out << '\n';
  for (long i = 0; i < rows.rows(); ++i) {
    for (long j = 0; j < rows.cols(); ++j) {
      if (j) out << ',';
      out << format_double(rows(i, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_table: write failed for " + path);
}

Eigen::MatrixXd read_table(const std::string& path, std::vector<std::string>* header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_table: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_table: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> head;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) head.push_back(cell);
  }
  if (header) *header = head;
  long cols = static_cast<long>(head.size());

  std::vector<double> data;
  long line_no = 1, rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    long c = 0;
    while (std::getline(ss, cell, ',')) {
      size_t pos = 0;
      double v;
      try {
        v = std::stod(cell, &pos);
      } catch (const std::exception&) {
        throw std::runtime_error("read_table: bad number at " + path + ":" +
                                 std::to_string(line_no));
      }
      if (pos != cell.size())
        throw std::runtime_error("read_table: trailing junk at " + path + ":" +
                                 std::to_string(line_no));
      data.push_back(v);
      ++c;
    }
    if (c != cols)
      throw std::runtime_error("read_table: expected " + std::to_string(cols) +
                               " cells at " + path + ":" + std::to_string(line_no));
    ++rows;
  }
  Eigen::MatrixXd m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = data[static_cast<size_t>(i * cols + j)];
  return m;
}

}  // namespace roughfilter::csv
