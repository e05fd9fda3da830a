#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

// Deterministic CSV tables: header row, comma separation, LF line endings,
// doubles rendered with %.17g so write/read round-trips are bit-exact.

namespace roughfilter::csv {

std::string format_double(double v);

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const Eigen::MatrixXd& rows);

// Returns the data matrix; the header goes to *header when non-null.
// Throws std::runtime_error with the offending line number on malformed input.
Eigen::MatrixXd read_table(const std::string& path, std::vector<std::string>* header = nullptr);

}  // namespace roughfilter::csv
