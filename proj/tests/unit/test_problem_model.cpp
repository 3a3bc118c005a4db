#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "bsvi/problem_model.hpp"

using namespace bsvi;

namespace {

ProblemSpec brownian_spec(double K) {
    ProblemSpec s;
    s.name = "test";
    s.drift = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.diffusion = [](double, std::span<const double>, std::span<double> out) { out[0] = 1.0; };
    s.generator = [](double, std::span<const double>, double, std::span<const double>) { return 0.0; };
    s.terminal = [](std::span<const double> x) { return 0.0 * x[0]; };
    s.lipschitz = K;
    return s;
}

bool has_contraction_warning(double K, std::size_t n, double a) {
    SchemeParams p;
    p.a_exponent = a;
    return validate_spec(brownian_spec(K), p, make_partition(1.0, n)).has(Violation::Kind::contraction);
}

}  // namespace

TEST(Partition, NodesQuarterGrid) {
    const Partition p = make_partition(1.0, 4);
    const std::vector<double> expect{0.0, 0.25, 0.5, 0.75, 1.0};
    EXPECT_EQ(p.nodes(), expect);
    EXPECT_EQ(p.step_size(), 0.25);
}

TEST(Partition, SingleStep) {
    const Partition p = make_partition(2.0, 1);
    EXPECT_EQ(p.nodes(), (std::vector<double>{0.0, 2.0}));
}

TEST(Partition, ThirdsDerivedNotAccumulated) {
    const Partition p = make_partition(1.0, 3);
    EXPECT_EQ(p.node(1), 1.0 / 3.0);
    EXPECT_EQ(p.node(3), 1.0);
}

TEST(Partition, NodesMatchFormulaBitForBit) {
    for (std::size_t n : {1u, 3u, 7u, 10u, 64u, 1000u}) {
        const Partition p = make_partition(1.7, n);
        for (std::size_t i = 0; i <= n; ++i) EXPECT_EQ(p.node(i), 1.7 * static_cast<double>(i) / static_cast<double>(n));
        EXPECT_EQ(p.node(n), 1.7);
    }
}

TEST(Partition, RejectsBadInput) {
    EXPECT_THROW(make_partition(1.0, 0), std::invalid_argument);
    EXPECT_THROW(make_partition(0.0, 4), std::invalid_argument);
    EXPECT_THROW(make_partition(-1.0, 4), std::invalid_argument);
    EXPECT_THROW(make_partition(1.0, 4).node(5), std::out_of_range);
}

TEST(ProblemSpec, CheckCatchesStructuralErrors) {
    ProblemSpec ok = brownian_spec(1.0);
    EXPECT_NO_THROW(ok.check());

    ProblemSpec missing = ok;
    missing.terminal = nullptr;
    EXPECT_THROW(missing.check(), std::invalid_argument);

    ProblemSpec horizon = ok;
    horizon.initial_time = 1.0;
    EXPECT_THROW(horizon.check(), std::invalid_argument);

    ProblemSpec dims = ok;
    dims.initial_x = {0.0, 0.0};
    EXPECT_THROW(dims.check(), std::invalid_argument);

    ProblemSpec outside = ok;
    outside.domain = IntervalSet{1.0, 2.0};
    EXPECT_THROW(outside.check(), std::invalid_argument);
    outside.initial_x = {1.0};
    EXPECT_NO_THROW(outside.check());
}

TEST(SchemeParams, Ranges) {
    SchemeParams p;
    EXPECT_NO_THROW(p.check());
    p.a_exponent = 0.5;
    EXPECT_THROW(p.check(), std::invalid_argument);
    p.a_exponent = 0.0;
    EXPECT_THROW(p.check(), std::invalid_argument);
    p = SchemeParams{};
    p.estimator = TreeExact{};
    EXPECT_THROW(p.check(), std::invalid_argument);
    p.law = IncrementLaw::rademacher;
    EXPECT_NO_THROW(p.check());
    EXPECT_DOUBLE_EQ(p.epsilon(0.125), 0.5);
}

TEST(ValidateSpec, CleanSpecHasNoViolations) {
    SchemeParams p;
    const auto report = validate_spec(brownian_spec(0.0), p, make_partition(1.0, 64));
    EXPECT_TRUE(report.empty()) << report.violations.front().detail;
}

TEST(ValidateSpec, QuadraticTerminalBreaksDeclaredConstant) {
    ProblemSpec s = brownian_spec(0.0);
    s.terminal = [](std::span<const double> x) { return x[0] * x[0]; };
    const auto report = validate_spec(s, SchemeParams{}, make_partition(1.0, 64));
    EXPECT_TRUE(report.has(Violation::Kind::lipschitz, "g"));
    EXPECT_FALSE(report.has(Violation::Kind::lipschitz, "b"));
}

TEST(ValidateSpec, NonFiniteGenerator) {
    ProblemSpec s = brownian_spec(1.0);
    s.generator = [](double, std::span<const double> x, double, std::span<const double>) {
        return x[0] > 0.0 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    };
    const auto report = validate_spec(s, SchemeParams{}, make_partition(1.0, 64));
    EXPECT_TRUE(report.has(Violation::Kind::non_finite, "F"));
}

TEST(ValidateSpec, ContractionThreshold) {
    // 0.25 * (1 + 4^(1/3)) = 0.6468... < 1
    const double q = 0.25 * (1.0 + std::cbrt(4.0));
    ASSERT_NEAR(q, 0.6468, 1e-4);
    EXPECT_FALSE(has_contraction_warning(1.0, 4, 1.0 / 3.0));
    // n = 1: 1 * (1 + 1) = 2
    EXPECT_TRUE(has_contraction_warning(1.0, 1, 1.0 / 3.0));
    // n = 2, K = 1: 0.5 * (1 + 2^(1/3)) = 1.13
    EXPECT_TRUE(has_contraction_warning(1.0, 2, 1.0 / 3.0));
}

TEST(ValidateSpec, Pure) {
    ProblemSpec s = brownian_spec(0.5);
    s.terminal = [](std::span<const double> x) { return std::sin(3.0 * x[0]); };
    const auto a = validate_spec(s, SchemeParams{}, make_partition(1.0, 8));
    const auto b = validate_spec(s, SchemeParams{}, make_partition(1.0, 8));
    ASSERT_EQ(a.violations.size(), b.violations.size());
    for (std::size_t k = 0; k < a.violations.size(); ++k) {
        EXPECT_EQ(a.violations[k].coefficient, b.violations[k].coefficient);
        EXPECT_EQ(a.violations[k].ratio, b.violations[k].ratio);
    }
}
