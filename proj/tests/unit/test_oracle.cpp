#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "bsvi/backward_solver.hpp"
#include "bsvi/oracle.hpp"

using namespace bsvi;

namespace {

ProblemSpec brownian(double x0) {
    ProblemSpec s;
    s.drift = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.diffusion = [](double, std::span<const double>, std::span<double> out) { out[0] = 1.0; };
    s.generator = [](double, std::span<const double>, double, std::span<const double>) { return 0.0; };
    s.terminal = [](std::span<const double> x) { return x[0]; };
    s.initial_x = {x0};
    s.lipschitz = 1.0;
    return s;
}

BackwardSolution solver_on_tree(const ProblemSpec& s, SchemeParams p, std::size_t n) {
    p.estimator = TreeExact{};
    p.law = IncrementLaw::rademacher;
    p.fixed_point_tol = 1e-14;
    auto inc = std::make_shared<const IncrementEnsemble>(enumerate_rademacher_tree(make_partition(s.horizon, n), 1));
    return solve_bsvi(s, p, simulate_forward(s, inc));
}

}  // namespace

TEST(Oracle, SingleStepMartingale) {
    const auto table = oracle_solve(brownian(0.25), SchemeParams{}, make_partition(1.0, 1));
    ASSERT_EQ(table.steps(), 1u);
    EXPECT_EQ(table.level(0).states.size(), 1u);
    EXPECT_EQ(table.level(1).states.size(), 2u);
    EXPECT_NEAR(table.y(0, 0), 0.25, 1e-15);
    EXPECT_NEAR(table.z(0, 0), 1.0, 1e-15);
}

TEST(Oracle, ConstantTerminal) {
    ProblemSpec s = brownian(0.0);
    s.terminal = [](std::span<const double>) { return -1.5; };
    const auto table = oracle_solve(s, SchemeParams{}, make_partition(1.0, 5));
    for (std::size_t i = 0; i <= 5; ++i)
        for (std::size_t k = 0; k < table.level(i).y.size(); ++k) {
            EXPECT_EQ(table.level(i).y[k], -1.5);
            EXPECT_EQ(table.level(i).z[k], 0.0);
        }
}

TEST(Oracle, LinearGeneratorClosedForm) {
    // Y_i = X_i (1 + r h)^{-(n - i)} when F = -r y, g = x, X a symmetric walk
    const double rate = 0.8;
    ProblemSpec s = brownian(0.5);
    s.generator = [rate](double, std::span<const double>, double y, std::span<const double>) { return -rate * y; };
    for (std::size_t n = 1; n <= 3; ++n) {
        const double h = 1.0 / n;
        const auto table = oracle_solve(s, SchemeParams{}, make_partition(1.0, n));
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t k = 0; k < table.level(i).y.size(); ++k)
                EXPECT_NEAR(table.level(i).y[k],
                            table.level(i).states[k][0] * std::pow(1.0 + rate * h, -static_cast<double>(n - i)),
                            1e-12);
    }
}

TEST(Oracle, RecombiningTreeDeduplicates) {
    // sqrt(h) = 0.5 keeps every state dyadic, so recombination is exact in floating point
    const auto table = oracle_solve(brownian(0.0), SchemeParams{}, make_partition(1.0, 4));
    for (std::size_t i = 0; i <= 4; ++i) EXPECT_EQ(table.level(i).states.size(), i + 1);
    // (+,-) and (-,+) share a node
    EXPECT_EQ(table.node(0b0100, 2), table.node(0b1000, 2));
}

TEST(Oracle, MatchesSolverForSmallTrees) {
    struct Case {
        ConvexFunction phi;
        SchemeVariant variant;
    };
    const std::vector<Case> cases{{ConvexFunction::indicator(0.0, kInf), SchemeVariant::implicit},
                                  {ConvexFunction::abs(0.7), SchemeVariant::implicit},
                                  {ConvexFunction::indicator_point(0.0), SchemeVariant::implicit},
                                  {ConvexFunction::quadratic(2.0), SchemeVariant::explicit_}};
    ProblemSpec s = brownian(0.1);
    s.generator = [](double, std::span<const double>, double y, std::span<const double> z) {
        return -0.5 * y + 0.3 * std::sin(y) + 0.2 * z[0];
    };
    for (const auto& c : cases) {
        s.phi = c.phi;
        SchemeParams p;
        p.variant = c.variant;
        for (std::size_t n = 1; n <= 6; ++n) {
            const auto table = oracle_solve(s, p, make_partition(1.0, n));
            const auto gap = oracle_gap(table, solver_on_tree(s, p, n));
            EXPECT_LE(gap.max(), 1e-10) << c.phi.name() << " n=" << n;
        }
    }
}

TEST(Oracle, GapDetectsDisagreement) {
    ProblemSpec s = brownian(0.0);
    const auto table = oracle_solve(s, SchemeParams{}, make_partition(1.0, 3));
    s.terminal = [](std::span<const double> x) { return x[0] + 1e-6; };
    EXPECT_NEAR(oracle_gap(table, solver_on_tree(s, SchemeParams{}, 3)).y, 1e-6, 1e-12);
}

TEST(Oracle, Preconditions) {
    ProblemSpec s = brownian(0.0);
    SchemeParams p;
    p.tree_cap = 4;
    EXPECT_THROW(oracle_solve(s, p, make_partition(1.0, 5)), std::invalid_argument);
    s.domain = IntervalSet{-1.0, 1.0};
    EXPECT_THROW(oracle_solve(s, SchemeParams{}, make_partition(1.0, 2)), std::invalid_argument);
}
