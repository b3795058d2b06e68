#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "primeavg/arith.hpp"

using namespace primeavg;

namespace {

const ArithTables& small_tables() {
    static const ArithTables t = ArithTables::build(10000);
    return t;
}

}  // namespace

TEST(ArithTables, SmallBoundValues) {
    const auto t = ArithTables::build(10);
    EXPECT_DOUBLE_EQ(t.lambda(8), std::log(2.0));
    EXPECT_DOUBLE_EQ(t.lambda(6), 0.0);
    EXPECT_EQ(t.mobius(6), 1);
    EXPECT_EQ(t.totient(9), 6);
}

TEST(ArithTables, SmallestBound) {
    const auto t = ArithTables::build(2);
    EXPECT_DOUBLE_EQ(t.lambda(2), std::log(2.0));
    EXPECT_EQ(t.mobius(2), -1);
    EXPECT_TRUE(t.is_prime(2));
}

TEST(ArithTables, RejectsBadBounds) {
    EXPECT_THROW(ArithTables::build(1), std::invalid_argument);
    EXPECT_THROW(ArithTables::build(0), std::invalid_argument);
    EXPECT_THROW(ArithTables::build(1000, 500), std::length_error);
}

TEST(ArithTables, MatchesTrialDivisionUpTo10k) {
    const auto& t = small_tables();
    for (i64 n = 1; n <= 10000; ++n) {
        ASSERT_NEAR(t.lambda(n), oracle::von_mangoldt(n), 1e-12) << n;
        ASSERT_EQ(t.mobius(n), oracle::mobius(n)) << n;
        const bool prime = n > 1 && std::abs(oracle::von_mangoldt(n) - std::log(static_cast<double>(n))) < 1e-12;
        ASSERT_EQ(t.is_prime(n), prime) << n;
    }
    for (i64 n = 1; n <= 2000; ++n) ASSERT_EQ(t.totient(n), oracle::totient(n)) << n;
}

TEST(ArithTables, DivisorSumsOfLambdaAndMu) {
    const auto& t = small_tables();
    const double tol = 1e-9 * std::log(10000.0);
    for (i64 n = 2; n <= 10000; ++n) {
        double s = 0.0;
        int m = 0;
        for (i64 d : divisors(n)) {
            s += t.lambda(d);
            m += t.mobius(d);
        }
        ASSERT_NEAR(s, std::log(static_cast<double>(n)), tol) << n;
        ASSERT_EQ(m, 0) << n;
    }
    EXPECT_EQ(t.mobius(1), 1);
}

TEST(ArithTables, TotientLowerBound) {
    const auto& t = small_tables();
    // phi(q) >= c sqrt(q); the smallest ratio on the range is attained early.
    double c = 1e9;
    for (i64 q = 1; q <= 10000; ++q) c = std::min(c, static_cast<double>(t.totient(q)) / std::sqrt(q));
    EXPECT_GT(c, 0.7);
}

TEST(ArithTables, Deterministic) {
    const auto a = ArithTables::build(5000);
    const auto b = ArithTables::build(5000);
    ASSERT_EQ(a.lambda_values().size(), b.lambda_values().size());
    for (std::size_t i = 0; i < a.lambda_values().size(); ++i) {
        ASSERT_EQ(a.lambda_values()[i], b.lambda_values()[i]);
        ASSERT_EQ(a.mobius_values()[i], b.mobius_values()[i]);
        ASSERT_EQ(a.totient_values()[i], b.totient_values()[i]);
    }
}

TEST(ArithTables, ChebyshevSumNearMillion) {
    const auto t = ArithTables::build(1000000);
    double s = 0.0;
    for (i64 n = 1; n <= 1000000; ++n) s += t.lambda(n);
    EXPECT_NEAR(s / 1e6, 1.0, 0.003);
}

TEST(ReducedResidues, Examples) {
    EXPECT_EQ(reduced_residues(1), (std::vector<i64>{0}));
    EXPECT_EQ(reduced_residues(6), (std::vector<i64>{1, 5}));
    EXPECT_EQ(reduced_residues(8), (std::vector<i64>{1, 3, 5, 7}));
    for (i64 q = 1; q <= 200; ++q) EXPECT_EQ(static_cast<i64>(reduced_residues(q).size()), totient_of(q));
}

TEST(Helpers, InverseModAndFactorization) {
    for (i64 m = 2; m <= 60; ++m)
        for (i64 a = 1; a < m; ++a) {
            if (std::gcd(a, m) != 1) {
                EXPECT_THROW(inverse_mod(a, m), std::invalid_argument);
                continue;
            }
            EXPECT_EQ(mod(a * inverse_mod(a, m), m), 1);
        }
    EXPECT_EQ(inverse_mod(5, 1), 0);
    for (i64 n = 1; n <= 500; ++n) {
        EXPECT_EQ(mobius_of(n), oracle::mobius(n));
        EXPECT_EQ(totient_of(n), oracle::totient(n));
    }
}

TEST(Progression, Validation) {
    EXPECT_NO_THROW(Progression::make(4, 1));
    EXPECT_THROW(Progression::make(4, 2), std::invalid_argument);
    EXPECT_THROW(Progression::make(0, 0), std::invalid_argument);
    EXPECT_THROW(Progression::make(3, 3), std::invalid_argument);
    EXPECT_THROW(Progression::make(3, -1), std::invalid_argument);
    EXPECT_EQ(Progression::make(1, 0).first_positive(), 1);
    EXPECT_EQ(Progression::make(5, 2).first_positive(), 2);
    EXPECT_TRUE(Progression::make(5, 2).contains(-3));
}

TEST(Psi, Examples) {
    const auto& t = small_tables();
    EXPECT_NEAR(psi_progression(t, 10, Progression::make(4, 1)), std::log(5.0) + std::log(3.0), 1e-12);
    EXPECT_DOUBLE_EQ(psi_progression(t, 2, Progression::make(1, 0)), 0.0);
    const double v = psi_progression(t, 100, Progression::make(3, 1));
    EXPECT_NEAR(v, 50.0, 12.5);
    EXPECT_NEAR(v, oracle::psi(100, 3, 1), 1e-9);
    EXPECT_THROW(psi_progression(t, 10001, Progression::make(1, 0)), std::out_of_range);
}

TEST(Psi, StrictUpperLimit) {
    const auto& t = small_tables();
    // 7 is prime: Psi(7) excludes it, Psi(8) includes it.
    const auto all = Progression::make(1, 0);
    EXPECT_NEAR(psi_progression(t, 8, all) - psi_progression(t, 7, all), std::log(7.0), 1e-12);
}

TEST(Psi, ResidueClassesPartitionTheFullSum) {
    const auto& t = small_tables();
    for (i64 y : {1, 2, 3, 4, 6, 10, 12, 30}) {
        for (i64 x : {50, 777, 10000}) {
            double total = 0.0;
            for (i64 b : reduced_residues(y)) total += psi_progression(t, x, Progression::make(y, b));
            for (i64 n = 1; n < x; ++n)
                if (std::gcd(n, y) > 1) total += t.lambda(n);
            EXPECT_NEAR(total, psi_progression(t, x, Progression::make(1, 0)), 1e-9) << y << " " << x;
        }
    }
}

TEST(SwReport, DecreasingErrorForAllIntegers) {
    const auto t = ArithTables::build(1000000);
    const std::vector<i64> grid{1000, 10000, 100000, 1000000};
    const auto rep = sw_error_report(t, grid, Progression::make(1, 0));
    ASSERT_EQ(rep.rows.size(), 4u);
    for (std::size_t i = 1; i < rep.rows.size(); ++i) EXPECT_LT(rep.rows[i].rel_error, rep.rows[i - 1].rel_error);
    // Reference values from an independent trial-division computation.
    EXPECT_NEAR(rep.rows[0].rel_error, 0.003319, 5e-6);
    EXPECT_NEAR(rep.rows[3].psi, 999586.597495633, 1e-6);
    EXPECT_FALSE(rep.outside_range);
}

TEST(SwReport, SmallCases) {
    const auto& t = small_tables();
    const std::vector<i64> one{1000};
    const auto rep = sw_error_report(t, one, Progression::make(4, 1));
    ASSERT_EQ(rep.rows.size(), 1u);
    EXPECT_LT(rep.rows[0].rel_error, 1.0);
    EXPECT_NEAR(rep.rows[0].rel_error, 0.01827, 1e-4);

    const std::vector<i64> tiny{10};
    const auto rep3 = sw_error_report(t, tiny, Progression::make(3, 1));
    ASSERT_EQ(rep3.rows.size(), 1u);
    EXPECT_FALSE(rep3.outside_range);
    // y = 12 exceeds (log 10)^2.
    EXPECT_TRUE(sw_error_report(t, tiny, Progression::make(12, 1)).outside_range);

    EXPECT_THROW(sw_error_report(t, std::span<const i64>{}, Progression::make(1, 0)), std::invalid_argument);
}
