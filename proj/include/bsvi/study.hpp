#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bsvi/config.hpp"

namespace bsvi {

struct ReportRow {
    std::size_t n = 0;
    double h = 0.0;
    double eps = 0.0;
    /// max_i mean_j |Y - Y_ref|^2 at the nodes
    double error_Y_sup = 0.0;
    /// mean_j sum_i of the integral of |Z - Z_ref|^2 over [t_i, t_{i+1}]
    double error_Z_l2 = 0.0;
    /// mean_j sum_i h |Y - Y_ref|^2
    double error_Y_l2 = 0.0;
    /// sqrt(max_i mean_j |X - X_ref|^2), forward studies only
    double error_X_strong = 0.0;
    /// max - min of the headline error over replicate seeds (0 with one replicate)
    double spread = 0.0;
    double wall_time = 0.0;
};

struct ConvergenceReport {
    std::string problem;
    std::string reference;
    Quantity quantity = Quantity::backward;
    std::size_t replicates = 1;
    std::vector<ReportRow> rows;

    static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
    double rate_Y = kNaN;  ///< slope on error_Y_sup (backward)
    double rate_Z = kNaN;  ///< slope on error_Z_l2 (backward)
    double rate_X = kNaN;  ///< slope on error_X_strong (forward)
    /// Some row's replicate spread exceeds 30% of its error.
    bool unreliable = false;
    /// Every row's error is below 5 x its replicate spread.
    bool at_noise_floor = false;
    /// Largest |coarse increment - block sum of fine increments| seen.
    double coupling_gap = 0.0;

    /// The error column that rates and flags refer to.
    double headline(const ReportRow& row) const;
};

/// Least-squares slope of log(error) against log(h). Throws
/// std::invalid_argument for fewer than 2 pairs or a nonpositive entry.
double fit_rate(std::span<const std::pair<double, double>> pairs);

/// Fills rates and flags from the rows. Rates whose column holds a zero stay NaN.
void annotate_report(ConvergenceReport& report);

/// Runs the study. Throws ConfigError for an unknown problem or reference, or
/// an n_ref that is not a multiple of every n.
ConvergenceReport run_study(const StudyConfig& config);

/// One-paragraph text summary: rates and flags.
std::string summarize(const ConvergenceReport& report);

}  // namespace bsvi
