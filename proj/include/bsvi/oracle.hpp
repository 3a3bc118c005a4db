#pragma once

#include <cstddef>
#include <vector>

#include "bsvi/backward_solver.hpp"
#include "bsvi/problem_model.hpp"

namespace bsvi {

/// Exact values of the discrete scheme on the enumerated Rademacher tree (d = 1).
///
/// Level i holds the distinct reachable Euler states at t_i together with their
/// (Y, Z, U). Paths reach nodes through their sign pattern: the prefix of the
/// first i signs of path j is j >> (n - i).
class TreeTable {
public:
    struct Level {
        std::vector<std::vector<double>> states;
        std::vector<double> y, z, u;
        std::vector<std::size_t> node_of_prefix;  ///< size 2^i
    };

    std::size_t steps() const { return levels.size() - 1; }
    const Level& level(std::size_t i) const { return levels.at(i); }
    /// Node index of path j at level i.
    std::size_t node(std::size_t path, std::size_t i) const {
        return levels.at(i).node_of_prefix.at(path >> (steps() - i));
    }
    double y(std::size_t path, std::size_t i) const { return levels[i].y[node(path, i)]; }
    double z(std::size_t path, std::size_t i) const { return levels[i].z[node(path, i)]; }
    double u(std::size_t path, std::size_t i) const { return levels[i].u[node(path, i)]; }

    std::vector<Level> levels;
};

/// Dynamic programming on the deduplicated tree. Conditional expectations are
/// the two-child averages; the implicit per-node equation is solved by
/// bisection to 1e-13 on a bracket grown from c +- h B, with B probed from the
/// residual at c. Only params.variant, params.a_exponent and params.tree_cap are
/// used. Throws std::invalid_argument when d != 1, the problem is reflected or
/// n exceeds the cap.
TreeTable oracle_solve(const ProblemSpec& spec, const SchemeParams& params, const Partition& partition);

struct OracleGap {
    double y = 0.0;
    double z = 0.0;
    double u = 0.0;
    double max() const;
};

/// Largest node-wise difference between a solver run on the enumerated tree
/// and the oracle table. Paths are mapped to tree nodes through their index.
OracleGap oracle_gap(const TreeTable& table, const BackwardSolution& sol);

}  // namespace bsvi
