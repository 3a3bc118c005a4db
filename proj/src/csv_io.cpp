#include "bsvi/csv_io.hpp"

#include <ostream>
#include <sstream>
#include <vector>

#include "bsvi/text_util.hpp"

namespace bsvi {

void write_report_csv(std::ostream& os, const ConvergenceReport& report, bool include_wall_time) {
    const bool fwd = report.quantity == Quantity::forward;
    os << (fwd ? "n,h,error_X_strong,spread" : "n,h,eps,error_Y_sup,error_Z_l2,error_Y_l2,spread");
    if (include_wall_time) os << ",wall_time";
    os << '\n';
    for (const auto& r : report.rows) {
        os << r.n << ',' << format_csv(r.h);
        if (fwd) {
            os << ',' << format_csv(r.error_X_strong);
        } else {
            os << ',' << format_csv(r.eps) << ',' << format_csv(r.error_Y_sup) << ',' << format_csv(r.error_Z_l2)
               << ',' << format_csv(r.error_Y_l2);
        }
        os << ',' << format_csv(r.spread);
        if (include_wall_time) os << ',' << format_csv(r.wall_time);
        os << '\n';
    }
}

std::string report_csv(const ConvergenceReport& report, bool include_wall_time) {
    std::ostringstream os;
    write_report_csv(os, report, include_wall_time);
    return os.str();
}

std::string drop_csv_column(const std::string& csv, const std::string& column) {
    std::istringstream in(csv);
    std::string line, out;
    std::ptrdiff_t drop = -1;
    bool header = true;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (header) {
            for (std::size_t c = 0; c < cells.size(); ++c)
                if (cells[c] == column) drop = static_cast<std::ptrdiff_t>(c);
            header = false;
        }
        std::string kept;
        bool first = true;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (static_cast<std::ptrdiff_t>(c) == drop) continue;
            if (!first) kept += ',';
            kept += cells[c];
            first = false;
        }
        out += kept + '\n';
    }
    return out;
}

}  // namespace bsvi
