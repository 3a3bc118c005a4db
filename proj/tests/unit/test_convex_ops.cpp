#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bsvi/convex_ops.hpp"
#include "bsvi/errors.hpp"

using namespace bsvi;

TEST(Resolvent, CatalogExamples) {
    EXPECT_EQ(resolvent(ConvexFunction::zero(), 3.7, 0.2), 3.7);
    EXPECT_DOUBLE_EQ(resolvent(ConvexFunction::quadratic(1.0), 2.0, 1.0), 1.0);
    EXPECT_EQ(resolvent(ConvexFunction::indicator(0.0, kInf), -1.0, 0.5), 0.0);
    EXPECT_EQ(resolvent(ConvexFunction::abs(1.0), 0.5, 1.0), 0.0);
    EXPECT_EQ(resolvent(ConvexFunction::indicator_point(0.3), -4.0, 0.1), 0.3);
}

TEST(Yosida, CatalogExamples) {
    EXPECT_EQ(yosida_gradient(ConvexFunction::zero(), 5.0, 0.3), 0.0);
    EXPECT_DOUBLE_EQ(yosida_gradient(ConvexFunction::indicator(0.0, kInf), -1.0, 0.5), -2.0);
    EXPECT_DOUBLE_EQ(yosida_gradient(ConvexFunction::abs(1.0), 3.0, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(yosida_gradient(ConvexFunction::quadratic(1.0), 2.0, 1.0), 1.0);
}

TEST(Yosida, IndicatorIsScaledProjectionResidual) {
    const auto phi = ConvexFunction::indicator(-1.0, 2.0);
    for (double x : {-3.0, -1.0, 0.0, 2.0, 2.5}) {
        const double p = std::clamp(x, -1.0, 2.0);
        EXPECT_EQ(yosida_gradient(phi, x, 0.25), (x - p) / 0.25);
    }
}

TEST(Resolvent, OptimalityAndStepBound) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(-5.0, 5.0), ue(0.01, 2.0);
    for (const auto& phi : catalog_samples()) {
        for (int k = 0; k < 200; ++k) {
            const double x = ux(rng), eps = ue(rng);
            const double j = resolvent(phi, x, eps);
            EXPECT_TRUE(phi.subdifferential(j).contains((x - j) / eps, 1e-9)) << phi.name() << " x=" << x;
            const auto sub = phi.subdifferential(x);
            if (!sub.empty) EXPECT_LE(std::abs(j - x), eps * std::abs(sub.min_norm()) + 1e-12) << phi.name();
        }
    }
}

TEST(NumericResolvent, AgreesWithClosedForms) {
    for (const auto& phi : catalog_samples()) {
        for (double x = -4.0; x <= 4.0; x += 0.37)
            for (double eps : {0.01, 0.1, 0.5, 1.0, 3.0})
                EXPECT_NEAR(numeric_resolvent(phi, x, eps), resolvent(phi, x, eps), 1e-8)
                    << phi.name() << " x=" << x << " eps=" << eps;
    }
}

TEST(NumericResolvent, CustomFunction) {
    // phi(y) = exp(y): J solves y + eps e^y = x
    ConvexFunction::Custom c;
    c.name = "exp";
    c.value = [](double y) { return std::exp(y); };
    c.subdifferential = [](double y) { return ExtInterval::point(std::exp(y)); };
    const auto phi = ConvexFunction::custom(c);
    for (double x : {-2.0, 0.0, 1.5}) {
        const double j = resolvent(phi, x, 0.4);
        EXPECT_NEAR(j + 0.4 * std::exp(j), x, 1e-8);
    }
}

TEST(NumericResolvent, CustomWithBoundedDomain) {
    // phi(y) = -log(y) on (0, inf), closed domain [0, inf)
    ConvexFunction::Custom c;
    c.name = "neglog";
    c.value = [](double y) { return y > 0.0 ? -std::log(y) : kInf; };
    c.subdifferential = [](double y) { return y > 0.0 ? ExtInterval::point(-1.0 / y) : ExtInterval::none(); };
    c.domain = {0.0, kInf, false};
    const auto phi = ConvexFunction::custom(c);
    // J = (x + sqrt(x^2 + 4 eps)) / 2
    for (double x : {-1.0, 0.0, 2.0}) EXPECT_NEAR(resolvent(phi, x, 0.5), 0.5 * (x + std::sqrt(x * x + 2.0)), 1e-8);
}

TEST(ConvexFunction, RejectsInvalidParameters) {
    EXPECT_THROW(ConvexFunction::quadratic(-1.0), std::invalid_argument);
    EXPECT_THROW(ConvexFunction::abs(-0.1), std::invalid_argument);
    EXPECT_THROW(ConvexFunction::indicator(1.0, 0.0), std::invalid_argument);
}

TEST(ConvexFunction, ParseRoundTrip) {
    for (const auto& phi : catalog_samples()) {
        if (phi.is_custom()) continue;
        EXPECT_EQ(parse_convex_function(phi.name()).name(), phi.name());
    }
    EXPECT_EQ(parse_convex_function("indicator:[0,inf]").name(), "indicator:[0,inf]");
    EXPECT_THROW(parse_convex_function("cubic:1"), ConfigError);
    EXPECT_THROW(parse_convex_function("abs:x"), ConfigError);
}

TEST(Projection, Examples) {
    const auto a = project_to_convex(IntervalSet{-1.0, 1.0}, std::vector<double>{1.5});
    EXPECT_EQ(a.point, std::vector<double>{1.0});
    EXPECT_EQ(a.distance, 0.5);

    const auto b = project_to_convex(BallSet{{0.0, 0.0}, 1.0}, std::vector<double>{2.0, 0.0});
    EXPECT_EQ(b.point, (std::vector<double>{1.0, 0.0}));
    EXPECT_EQ(b.distance, 1.0);

    const std::vector<double> inside{0.2, -0.3};
    const auto c = project_to_convex(BallSet{{0.0, 0.0}, 1.0}, inside);
    EXPECT_EQ(c.point, inside);
    EXPECT_EQ(c.distance, 0.0);

    const auto d = project_to_convex(HalfspaceSet{{0.0, 2.0}, 2.0}, std::vector<double>{3.0, 4.0});
    EXPECT_NEAR(d.point[0], 3.0, 1e-15);
    EXPECT_NEAR(d.point[1], 1.0, 1e-15);
    EXPECT_NEAR(d.distance, 3.0, 1e-15);
}

TEST(Projection, IdempotentNonexpansiveAndOnBoundary) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 2.0);
    const std::vector<ConvexSet> sets{IntervalSet{-0.5, 1.0}, BallSet{{1.0, -1.0}, 0.7},
                                      HalfspaceSet{{1.0, 1.0}, 0.5}};
    for (const auto& set : sets) {
        const std::size_t k = set_dimension(set);
        for (int rep = 0; rep < 200; ++rep) {
            std::vector<double> x(k), y(k);
            for (auto& v : x) v = n(rng);
            for (auto& v : y) v = n(rng);
            const auto px = project_to_convex(set, x), py = project_to_convex(set, y);
            EXPECT_LE(level_function(set, px.point), 1e-12);
            const auto ppx = project_to_convex(set, px.point);
            for (std::size_t r = 0; r < k; ++r) EXPECT_NEAR(ppx.point[r], px.point[r], 1e-14);
            double dxy = 0.0, dp = 0.0;
            for (std::size_t r = 0; r < k; ++r) {
                dxy += (x[r] - y[r]) * (x[r] - y[r]);
                dp += (px.point[r] - py.point[r]) * (px.point[r] - py.point[r]);
            }
            EXPECT_LE(std::sqrt(dp), std::sqrt(dxy) + 1e-12);
            if (level_function(set, x) > 0.0) EXPECT_NEAR(px.distance, level_function(set, x), 1e-12) << set_name(set);
        }
    }
}

TEST(Projection, RejectsDegenerateSets) {
    EXPECT_THROW(validate_set(IntervalSet{1.0, 0.0}, 1), std::invalid_argument);
    EXPECT_THROW(validate_set(BallSet{{0.0}, -1.0}, 1), std::invalid_argument);
    EXPECT_THROW(validate_set(HalfspaceSet{{0.0, 0.0}, 1.0}, 2), std::invalid_argument);
    EXPECT_THROW(validate_set(BallSet{{0.0, 0.0}, 1.0}, 1), std::invalid_argument);
}

TEST(Projection, ParseSets) {
    EXPECT_EQ(set_name(parse_convex_set("interval:[-1,1]")), "interval:[-1,1]");
    EXPECT_EQ(set_dimension(parse_convex_set("ball:[0,0,0]:2")), 3u);
    EXPECT_EQ(set_dimension(parse_convex_set("halfspace:[1,0]:0.5")), 2u);
    EXPECT_THROW(parse_convex_set("square:1"), ConfigError);
}
