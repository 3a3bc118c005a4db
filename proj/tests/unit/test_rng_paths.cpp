#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bsvi/rng_paths.hpp"

using namespace bsvi;

// Known-answer vectors of the Philox4x32-10 reference implementation.
TEST(Philox, KnownAnswers) {
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    EXPECT_EQ(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}), (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(Philox4x32::generate(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}),
              (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(Philox4x32::generate(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}),
              (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Tree, TwoStepEnumeration) {
    const Partition p = make_partition(1.0, 2);
    const auto t = enumerate_rademacher_tree(p, 1);
    ASSERT_EQ(t.paths(), 4u);
    EXPECT_TRUE(t.enumerated());
    const double s = std::sqrt(0.5);
    const double expect[4][2] = {{s, s}, {s, -s}, {-s, s}, {-s, -s}};
    for (std::size_t j = 0; j < 4; ++j)
        for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(t.at(j, i)[0], expect[j][i]);
}

TEST(Tree, SumsVanishExactly) {
    const Partition p = make_partition(1.0, 5);
    const auto t = enumerate_rademacher_tree(p, 2);
    ASSERT_EQ(t.paths(), 1024u);
    const double r = std::sqrt(0.2);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t k = 0; k < 2; ++k) {
            // every entry is exactly +-sqrt(h) and the signs balance, so the sum is 0 in exact arithmetic
            long plus = 0, minus = 0;
            for (std::size_t j = 0; j < t.paths(); ++j) {
                const double v = t.at(j, i)[k];
                ASSERT_TRUE(v == r || v == -r);
                (v > 0 ? plus : minus) += 1;
            }
            EXPECT_EQ(plus, minus);
        }
}

TEST(Tree, CapEnforced) {
    EXPECT_THROW(enumerate_rademacher_tree(make_partition(1.0, 21), 1), std::invalid_argument);
    EXPECT_THROW(enumerate_rademacher_tree(make_partition(1.0, 6), 1, 5), std::invalid_argument);
}

TEST(Gaussian, MeanWithinClt) {
    const Partition p = make_partition(1.0, 1);
    const std::size_t M = 100000;
    const auto e = sample_increments(p, M, 1, IncrementLaw::gaussian, 42);
    double s = 0.0;
    for (std::size_t j = 0; j < M; ++j) s += e.at(j, 0)[0];
    EXPECT_LE(std::abs(s / M), 4.0 * std::sqrt(1.0 / M));
}

TEST(Gaussian, VarianceWithinFiveStandardErrors) {
    const Partition p = make_partition(1.0, 4);
    const std::size_t M = 20000;
    const auto e = sample_increments(p, M, 2, IncrementLaw::gaussian, 9);
    const double h = 0.25;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t k = 0; k < 2; ++k) {
            double s = 0.0;
            for (std::size_t j = 0; j < M; ++j) s += e.at(j, i)[k] * e.at(j, i)[k];
            // Var of dW^2 is 2 h^2
            EXPECT_LE(std::abs(s / M - h), 5.0 * std::sqrt(2.0 * h * h / M));
        }
}

TEST(Rademacher, TwoPointLaw) {
    const Partition p = make_partition(1.0, 16);
    const auto e = sample_increments(p, 4000, 1, IncrementLaw::rademacher, 1);
    double plus = 0;
    for (double v : e.data()) {
        EXPECT_EQ(std::abs(v), 0.25);
        plus += v > 0;
    }
    const double n = static_cast<double>(e.data().size());
    EXPECT_LE(std::abs(plus / n - 0.5), 4.0 * 0.5 / std::sqrt(n));
}

TEST(Sampling, DeterministicAcrossRunsAndWorkers) {
    const Partition p = make_partition(2.0, 7);
    const auto a = sample_increments(p, 333, 3, IncrementLaw::gaussian, 77, 1);
    const auto b = sample_increments(p, 333, 3, IncrementLaw::gaussian, 77, 1);
    const auto c = sample_increments(p, 333, 3, IncrementLaw::gaussian, 77, 4);
    const auto d = sample_increments(p, 333, 3, IncrementLaw::gaussian, 78, 1);
    EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
    EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), c.data().begin()));
    EXPECT_FALSE(std::equal(a.data().begin(), a.data().end(), d.data().begin()));
}

TEST(Sampling, PathSubstreamsIndependentOfEnsembleSize) {
    const Partition p = make_partition(1.0, 5);
    const auto small = sample_increments(p, 10, 1, IncrementLaw::gaussian, 5);
    const auto big = sample_increments(p, 1000, 1, IncrementLaw::gaussian, 5);
    for (std::size_t j = 0; j < 10; ++j)
        for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(small.at(j, i)[0], big.at(j, i)[0]);
    EXPECT_EQ(small.at(3, 2)[0], std::sqrt(0.2) * unit_draw(5, 3, 2, 0, IncrementLaw::gaussian));
}

TEST(Coarsen, BlockSums) {
    const Partition p = make_partition(1.0, 8);
    const auto fine = sample_increments(p, 50, 2, IncrementLaw::gaussian, 3);
    const auto coarse = coarsen(fine, 4);
    ASSERT_EQ(coarse.steps(), 2u);
    EXPECT_EQ(coarse.partition(), make_partition(1.0, 2));
    for (std::size_t j = 0; j < 50; ++j)
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t k = 0; k < 2; ++k) {
                double s = 0.0;
                for (std::size_t l = 0; l < 4; ++l) s += fine.at(j, 4 * i + l)[k];
                EXPECT_NEAR(coarse.at(j, i)[k], s, 1e-15);
            }
    EXPECT_THROW(coarsen(fine, 3), std::invalid_argument);
}

TEST(Dump, RoundTrip) {
    const Partition p(3.0, 6, 0.5);
    const auto e = sample_increments(p, 17, 2, IncrementLaw::rademacher, 123456789);
    std::stringstream ss;
    write_increments(ss, e);
    EXPECT_EQ(ss.str().size(), 5 * 8 + 2 * 8 + 17 * 6 * 2 * 8u);
    const auto back = read_increments(ss);
    EXPECT_EQ(back.partition(), p);
    EXPECT_EQ(back.seed(), e.seed());
    EXPECT_EQ(back.law(), e.law());
    EXPECT_TRUE(std::equal(e.data().begin(), e.data().end(), back.data().begin()));
}
