#include "bsvi/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace bsvi {

namespace {

constexpr double kBisectTol = 1e-13;

// Root of y -> y - c - h [F(t, x, y, z) - grad phi_eps(y)], increasing in y
// whenever h * Lip_y(F) < 1.
double bisect_node(double c, const std::vector<double>& x, double z, double t, const ProblemSpec& spec, double h,
                   double eps) {
    const std::span<const double> xs(x);
    const std::span<const double> zs(&z, 1);
    auto residual = [&](double y) { return y - c - h * (spec.generator(t, xs, y, zs) - yosida_gradient(spec.phi, y, eps)); };

    const double r0 = residual(c);
    if (r0 == 0.0) return c;
    double width = h * (std::abs(r0) / h + 1.0);
    double lo = c, hi = c;
    for (int grow = 0;; ++grow) {
        if (grow > 200) throw std::runtime_error("oracle: could not bracket the node equation");
        lo = c - width;
        hi = c + width;
        if (residual(lo) <= 0.0 && residual(hi) >= 0.0) break;
        width *= 2.0;
    }
    while (hi - lo > kBisectTol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (residual(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TreeTable oracle_solve(const ProblemSpec& spec, const SchemeParams& params, const Partition& partition) {
    spec.check();
    if (spec.brownian_dim != 1) throw std::invalid_argument("oracle: only d = 1 trees are supported");
    if (spec.reflected()) throw std::invalid_argument("oracle: reflected problems are not supported");
    const std::size_t n = partition.steps();
    if (n > params.tree_cap) throw std::invalid_argument("oracle: n exceeds the tree cap");

    const std::size_t m = spec.state_dim;
    const double h = partition.step_size();
    const double sq = std::sqrt(h);
    const double eps = std::pow(h, params.a_exponent);

    TreeTable table;
    table.levels.resize(n + 1);
    table.levels[0].states.push_back(spec.initial_x);
    table.levels[0].node_of_prefix = {0};
    // children[i][k] = {node reached with +sqrt(h), node reached with -sqrt(h)}
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> children(n);

    std::vector<double> b(m), s(m);
    for (std::size_t i = 0; i < n; ++i) {
        auto& cur = table.levels[i];
        auto& next = table.levels[i + 1];
        std::map<std::vector<double>, std::size_t> index;
        const double t = partition.node(i);
        for (const auto& x : cur.states) {
            spec.drift(t, x, b);
            spec.diffusion(t, x, s);
            std::size_t kids[2];
            for (int sign = 0; sign < 2; ++sign) {
                const double dw = sign == 0 ? sq : -sq;
                std::vector<double> child(m);
                for (std::size_t r = 0; r < m; ++r) child[r] = x[r] + b[r] * h + s[r] * dw;
                auto [it, fresh] = index.try_emplace(child, next.states.size());
                if (fresh) next.states.push_back(child);
                kids[sign] = it->second;
            }
            children[i].push_back({kids[0], kids[1]});
        }
        next.node_of_prefix.resize(cur.node_of_prefix.size() * 2);
        for (std::size_t p = 0; p < cur.node_of_prefix.size(); ++p) {
            const auto [plus, minus] = children[i][cur.node_of_prefix[p]];
            next.node_of_prefix[2 * p] = plus;
            next.node_of_prefix[2 * p + 1] = minus;
        }
    }

    auto& last = table.levels[n];
    for (const auto& x : last.states) {
        const double g = spec.terminal(x);
        last.y.push_back(g);
        last.z.push_back(0.0);
        last.u.push_back(yosida_gradient(spec.phi, g, eps));
    }

    for (std::size_t i = n; i-- > 0;) {
        auto& cur = table.levels[i];
        const auto& next = table.levels[i + 1];
        const double t = partition.node(i);
        for (std::size_t k = 0; k < cur.states.size(); ++k) {
            const auto [plus, minus] = children[i][k];
            const double yp = next.y[plus], ym = next.y[minus];
            const double c = 0.5 * (yp + ym);
            const double z = 0.5 * (yp - ym) * sq / h;
            double y;
            if (params.variant == SchemeVariant::implicit) {
                y = bisect_node(c, cur.states[k], z, t, spec, h, eps);
            } else {
                const std::span<const double> xs(cur.states[k]);
                const std::span<const double> zs(&z, 1);
                const double fp = spec.generator(t, xs, yp, zs) - yosida_gradient(spec.phi, yp, eps);
                const double fm = spec.generator(t, xs, ym, zs) - yosida_gradient(spec.phi, ym, eps);
                y = c + h * 0.5 * (fp + fm);
            }
            cur.y.push_back(y);
            cur.z.push_back(z);
            cur.u.push_back(yosida_gradient(spec.phi, c, eps));
        }
    }
    return table;
}

double OracleGap::max() const { return std::max({y, z, u}); }

OracleGap oracle_gap(const TreeTable& table, const BackwardSolution& sol) {
    if (sol.steps() != table.steps() || sol.paths() != (std::size_t{1} << table.steps()) || sol.brownian_dim() != 1)
        throw std::invalid_argument("oracle_gap: solution is not on the enumerated tree of the table");
    OracleGap gap;
    for (std::size_t j = 0; j < sol.paths(); ++j)
        for (std::size_t i = 0; i <= sol.steps(); ++i) {
            gap.y = std::max(gap.y, std::abs(sol.y(j, i) - table.y(j, i)));
            gap.z = std::max(gap.z, std::abs(sol.z(j, i)[0] - table.z(j, i)));
            gap.u = std::max(gap.u, std::abs(sol.u(j, i) - table.u(j, i)));
        }
    return gap;
}

}  // namespace bsvi
