#pragma once

#include <iosfwd>
#include <string>

#include "bsvi/study.hpp"

namespace bsvi {

/// Comma-separated rows with a header, LF line endings and 17 significant
/// digits. Backward studies: n,h,eps,error_Y_sup,error_Z_l2,error_Y_l2,spread,wall_time.
/// Forward studies: n,h,error_X_strong,spread,wall_time.
void write_report_csv(std::ostream& os, const ConvergenceReport& report, bool include_wall_time = true);
std::string report_csv(const ConvergenceReport& report, bool include_wall_time = true);

/// Removes the named column from CSV text (header match). Used to compare
/// reports while ignoring timings.
std::string drop_csv_column(const std::string& csv, const std::string& column);

}  // namespace bsvi
