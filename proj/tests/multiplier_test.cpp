#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "primeavg/fixtures.hpp"
#include "primeavg/multiplier.hpp"

using namespace primeavg;

namespace {

const ArithTables& tables() {
    static const ArithTables t = ArithTables::build(1 << 20);
    return t;
}

const FixtureSet& fixtures() {
    static const FixtureSet f = FixtureSet::load(PRIMEAVG_DEFAULT_FIXTURES);
    return f;
}

// Dirichlet kernel by geometric series.
cplx geometric_mean(double theta, i64 count) {
    const cplx z = oracle::e(-theta);
    if (std::abs(z - 1.0) < 1e-15) return 1.0;
    return (1.0 - std::pow(z, static_cast<double>(count))) / (1.0 - z) / static_cast<double>(count);
}

}  // namespace

TEST(MHat, Examples) {
    EXPECT_NEAR(std::abs(m_hat(0.0, 17.0) - cplx{1.0, 0.0}), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(m_hat(0.5, 2.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(m_hat(1.0 / 128.0, 64.0) - geometric_mean(1.0 / 128.0, 64)), 0.0, 1e-13);
    EXPECT_THROW(m_hat(0.1, 0.5), std::invalid_argument);
}

TEST(MHat, MatchesGeometricSeriesForIntegerLength) {
    for (i64 L : {1, 2, 7, 64, 1000})
        for (double theta : {0.013, 0.25, 0.4999, -0.3, 1.7})
            EXPECT_NEAR(std::abs(m_hat(theta, static_cast<double>(L)) - geometric_mean(theta, L)), 0.0, 1e-12);
}

TEST(MProgHat, CountAtZero) {
    const auto prog = Progression::make(4, 1);
    // n in {1, 5, 9}: three terms below 10.
    EXPECT_NEAR(m_prog_hat(0.0, 10, prog).real(), 4.0 * 3.0 / 10.0, 1e-15);
    EXPECT_THROW(m_prog_hat(0.0, 3, prog), std::invalid_argument);
}

TEST(MProgHat, FactorsThroughShiftedAverage) {
    // Exact form: e(-b theta) (yK/N) m_hat(y theta, K) with K the number of terms.
    for (i64 y : {1, 3, 4, 7})
        for (i64 b : reduced_residues(y))
            for (i64 N : {64, 65, 101}) {
                const auto prog = Progression::make(y, b);
                const i64 K = (N - b + y - 1) / y;
                for (double theta : {0.0, 0.01, 0.123, 0.49}) {
                    const cplx want = oracle::e(-static_cast<double>(b) * theta) *
                                      (static_cast<double>(y * K) / static_cast<double>(N)) *
                                      m_hat(static_cast<double>(y) * theta, static_cast<double>(K));
                    EXPECT_NEAR(std::abs(m_prog_hat(theta, N, prog) - want), 0.0, 1e-12);
                }
            }
}

TEST(MProgHat, RealLengthBranches) {
    // (N - b)/y integral: same terms on both sides, up to the phase e(-b theta) and the mass (N - b)/N.
    const auto p1 = Progression::make(5, 2);
    for (double theta : {0.001, 0.01, 0.2}) {
        const cplx lhs = m_prog_hat(theta, 102, p1);
        const cplx rhs = (100.0 / 102.0) * m_hat(5.0 * theta, 20.0);
        EXPECT_NEAR(std::abs(lhs - oracle::e(-2.0 * theta) * rhs), 0.0, 1e-12);
    }
    // (N - b)/y fractional: a real length L averages over the ceil(L) integers below it.
    for (double L : {19.4, 20.0, 170.67})
        for (double theta : {0.0, 0.003, 0.2})
            EXPECT_NEAR(std::abs(m_hat(theta, L) - (std::ceil(L) / L) * m_hat(theta, std::ceil(L))), 0.0, 1e-12);
    const auto p2 = Progression::make(5, 3);
    for (double theta : {0.01, 0.2}) {
        const double diff = std::abs(m_prog_hat(theta, 100, p2) - m_hat(5.0 * theta, 97.0 / 5.0));
        EXPECT_LE(diff, mm_constant(100, p2, 4096) * 3.0 * theta * (1 + 1e-6) + 1e-12);
    }
}

TEST(MProgHat, ElementaryRelationConstant) {
    const double C = fixtures().value("mm_constant");
    for (i64 N : {256, 1024})
        for (i64 y : {3, 5, 8})
            for (i64 b : reduced_residues(y)) EXPECT_LE(mm_constant(N, Progression::make(y, b), 256), C * (1 + 1e-9));
    EXPECT_EQ(mm_constant(100, Progression::make(1, 0)), 0.0);
    EXPECT_THROW(mm_constant(5, Progression::make(7, 3)), std::invalid_argument);
}

TEST(AHat, Examples) {
    const auto& t = tables();
    const double want = 2.0 / 10.0 * (std::log(5.0) + std::log(3.0));
    EXPECT_NEAR(a_hat(t, 0.0, 10, Progression::make(4, 1)).real(), want, 1e-12);
    EXPECT_NEAR(a_hat(t, 0.0, 1 << 20, Progression::make(3, 1)).real(), 1.0, 0.05);
    for (double theta : {0.0, 0.1, 0.37})
        EXPECT_NEAR(std::abs(a_hat(t, theta, 500, Progression::make(1, 0)) - oracle::prime_multiplier(theta, 500, 1, 0)),
                    0.0, 1e-10);
    EXPECT_NEAR(std::abs(a_hat(t, 0.21, 300, Progression::make(6, 5)) - oracle::prime_multiplier(0.21, 300, 6, 5)),
                0.0, 1e-10);
    EXPECT_THROW(a_hat(t, 0.0, (1 << 20) + 10, Progression::make(1, 0)), std::out_of_range);
}

TEST(AHat, ProfileMatchesDirectAndIsConjugateSymmetric) {
    const auto& t = tables();
    const auto prog = Progression::make(3, 2);
    const i64 N = 1000, M = 4096;
    const auto prof = a_hat_profile(t, N, prog, M);
    const double zero = prof.values[0].real();
    for (std::size_t k = 0; k < prof.values.size(); k += 37)
        ASSERT_NEAR(std::abs(prof.values[k] - a_hat(t, prof.xi(k), N, prog)), 0.0, 1e-8 * zero) << k;
    for (std::size_t k = 1; k < prof.values.size(); ++k) {
        EXPECT_NEAR(std::abs(prof.values[k] - std::conj(prof.values[M - k])), 0.0, 1e-12);
        EXPECT_LE(std::abs(prof.values[k]), zero + 1e-12);
    }
    EXPECT_THROW(a_hat_profile(t, N, prog, 3000), std::invalid_argument);
    EXPECT_THROW(a_hat_profile(t, N, prog, 512), std::invalid_argument);
}

TEST(AHat, LocalGridBothPathsAgree) {
    const auto& t = tables();
    const auto prog = Progression::make(1, 0);
    // Small window uses direct sums, a large one the modulated transforms.
    const i64 N = 4096;
    const auto direct = a_hat_local(t, N, prog, 0.25, 3, 64);
    const auto fft = a_hat_local(t, N, prog, 0.25, 2000, 64);
    for (i64 j = -3; j <= 3; ++j)
        EXPECT_NEAR(std::abs(direct[static_cast<std::size_t>(j + 3)] - fft[static_cast<std::size_t>(j + 2000)]), 0.0,
                    1e-10);
    for (i64 j : {-2000, -777, 0, 1500}) {
        const double theta = 0.25 + static_cast<double>(j) / (64.0 * N);
        EXPECT_NEAR(std::abs(fft[static_cast<std::size_t>(j + 2000)] - a_hat(t, theta, N, prog)), 0.0, 1e-10);
    }
}

TEST(Cutoff, SupportAndValues) {
    const auto eta = CutoffSpec::smooth();
    EXPECT_EQ(eta(0.0), 1.0);
    EXPECT_EQ(eta(1.0 / 16.0), 1.0);
    EXPECT_EQ(eta(-0.05), 1.0);
    EXPECT_EQ(eta(0.25), 0.0);
    EXPECT_EQ(eta(-0.3), 0.0);
    const double mid = eta(0.155);
    EXPECT_GT(mid, 0.0);
    EXPECT_LT(mid, 1.0);
    EXPECT_EQ(eta(0.1), eta(-0.1));
    EXPECT_EQ(CutoffSpec::identity()(123.0), 1.0);
    EXPECT_EQ(CutoffSpec::by_name("smooth").name, "smooth");
    EXPECT_THROW(CutoffSpec::by_name("box"), std::invalid_argument);
    EXPECT_THROW(CutoffSpec::smooth(0.3, 0.2), std::invalid_argument);
}

TEST(Cutoff, FiniteDifferencesVanishAtSupportEdges) {
    // All derivatives up to order 4 tend to zero at both transition points.
    const auto eta = CutoffSpec::smooth();
    const double h = 1e-3;
    for (double edge : {1.0 / 16.0, 1.0 / 4.0}) {
        for (int order = 1; order <= 4; ++order) {
            // Forward difference of the given order, one-sided away from the transition.
            const double x = edge == 0.25 ? edge : edge - order * h;
            double diff = 0.0;
            for (int j = 0; j <= order; ++j) {
                const double c = std::tgamma(order + 1) / (std::tgamma(j + 1) * std::tgamma(order - j + 1));
                diff += ((order - j) % 2 == 0 ? 1.0 : -1.0) * c * eta(x + j * h);
            }
            EXPECT_NEAR(diff / std::pow(h, order), 0.0, 1e-6) << edge << " " << order;
        }
    }
    // Monotone through the transition.
    double prev = 1.0;
    for (double u = 0.0; u <= 0.3; u += 1e-4) {
        EXPECT_LE(eta(u), prev + 1e-15);
        prev = eta(u);
    }
}

TEST(Farey, Examples) {
    const auto all = Progression::make(1, 0);
    const auto two = farey_points(2, all, ArcSelection::denominator);
    ASSERT_EQ(two.size(), 2u);
    EXPECT_EQ(two[0].a, 0);
    EXPECT_EQ(two[0].q, 1);
    EXPECT_EQ(two[1].a, 1);
    EXPECT_EQ(two[1].q, 2);
    // Order 5 has 11 fractions in [0, 1]; 1/1 is identified with 0/1 on the circle.
    EXPECT_EQ(farey_points(5, all, ArcSelection::denominator).size(), 10u);
    EXPECT_EQ(farey_points(1, Progression::make(6, 1), ArcSelection::height).size(), 6u);
    EXPECT_TRUE(approximant_points(1, all, ArcSelection::denominator).empty());
    EXPECT_THROW(farey_points(0, all, ArcSelection::denominator), std::invalid_argument);
    EXPECT_EQ(arc_selection_from("height"), ArcSelection::height);
    EXPECT_THROW(arc_selection_from("other"), std::invalid_argument);
}

TEST(Farey, HeightModeMatchesClassCounts) {
    for (i64 y : {1, 2, 4, 6, 9})
        for (i64 r = 1; r <= 6; ++r) {
            i64 with_height_r = 0;
            for (const auto& p : farey_points(r, Progression::make(y, 1 % y), ArcSelection::height))
                if (p.height == r) ++with_height_r;
            EXPECT_EQ(with_height_r, count_height_class(y, r).first) << y << " " << r;
        }
}

TEST(Farey, CutoffSupportsAreDisjoint) {
    // Disjoint whenever the denominators are within a factor of two.
    const auto prog = Progression::make(3, 1);
    const auto pts = farey_points(40, prog, ArcSelection::denominator);
    const double outer = CutoffSpec::smooth().outer;
    int pairs = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            if (pts[j].q > 2 * pts[i].q || pts[i].q > 2 * pts[j].q) continue;
            const double ri = outer / static_cast<double>(pts[i].ell * pts[i].ell);
            const double rj = outer / static_cast<double>(pts[j].ell * pts[j].ell);
            EXPECT_GT(dist_to_int(pts[i].center() - pts[j].center()), ri + rj) << i << " " << j;
            ++pairs;
        }
    EXPECT_GT(pairs, 1000);
}

TEST(LHat, Examples) {
    const auto prog = Progression::make(6, 1);
    const auto eta = CutoffSpec::smooth();
    const auto p = make_farey_point(1, 3, prog);
    // At the center the average has length 4096/6, whose ceiling over itself is the mass.
    const double mass = 683.0 / (4096.0 / 6.0);
    EXPECT_NEAR(std::abs(l_hat(1.0 / 3.0, p, 4096, prog, eta) - mass * p.upsilon), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(l_hat(1.0 / 3.0, p, 4098, prog, eta) - p.upsilon), 0.0, 1e-12);
    const double ell2 = static_cast<double>(p.ell * p.ell);
    EXPECT_EQ(std::abs(l_hat(1.0 / 3.0 + 1.0 / (2.0 * ell2), p, 4096, prog, eta)), 0.0);
    const auto p2 = Progression::make(2, 1);
    const auto zero = make_farey_point(1, 4, p2);
    EXPECT_EQ(zero.height, 0);
    for (double xi : {0.25, 0.2501, 0.3}) EXPECT_EQ(std::abs(l_hat(xi, zero, 4096, p2, eta)), 0.0);
    EXPECT_THROW(l_hat(0.0, p, 4096, Progression::make(5, 1), eta), std::invalid_argument);
}

TEST(Approximant, ProfileMatchesPointwiseAndVanishesOnMinorArcs) {
    const auto prog = Progression::make(3, 1);
    const auto eta = CutoffSpec::smooth();
    const i64 N = 1024, M = 4096, q_cut = 6;
    const auto prof = approximant_profile(N, prog, q_cut, eta, M);
    for (std::size_t k = 0; k < prof.values.size(); k += 13)
        ASSERT_NEAR(std::abs(prof.values[k] - approximant_hat(prof.xi(k), N, prog, q_cut, eta)), 0.0, 1e-12);
    // 0.4 is at distance > 1/60 from every a/q with q < 6; all supports have radius <= 1/36.
    EXPECT_EQ(std::abs(approximant_hat(0.45, N, prog, q_cut, eta)), 0.0);
    // At 0 only the point 0/1 contributes, with length N/3 and mass 342/(N/3).
    EXPECT_NEAR(std::abs(approximant_hat(0.0, N, prog, q_cut, eta)), 342.0 / (1024.0 / 3.0), 1e-12);
}

TEST(Approximant, QCutRange) {
    EXPECT_TRUE(q_cut_in_range(2, 1 << 20));
    EXPECT_TRUE(q_cut_in_range(4, 1 << 20));
    EXPECT_FALSE(q_cut_in_range(5, 1 << 20));
    EXPECT_FALSE(q_cut_in_range(16, 4096));
}

TEST(NearZero, Examples) {
    const auto& t = tables();
    const auto all = Progression::make(1, 0);
    const double e12 = near_zero_error(t, 1 << 12, all, 2);
    const double e20 = near_zero_error(t, 1 << 20, all, 2);
    EXPECT_GT(e12, 0.0);
    EXPECT_LT(e20, e12);
    EXPECT_TRUE(fixtures().at("near_zero_y1_N4096").matches(e12));
    EXPECT_THROW(near_zero_error(t, 4096, all, 2, 8), std::invalid_argument);
}

TEST(NearZero, AgreesWithMajorArcAtZero) {
    const auto& t = tables();
    const auto prog = Progression::make(3, 1);
    const auto origin = make_farey_point(0, 1, prog);
    EXPECT_NEAR(major_arc_error(t, 4096, prog, origin, 2), near_zero_error(t, 4096, prog, 2), 1e-12);
}

TEST(MajorArc, Trends) {
    const auto& t = tables();
    const auto prog = Progression::make(3, 1);
    const auto half = make_farey_point(1, 2, prog);
    EXPECT_LT(major_arc_error(t, 1 << 18, prog, half, 2), major_arc_error(t, 1 << 12, prog, half, 2));

    // Height-zero point: the model vanishes and the error is sup |a_hat| on the arc.
    const auto p2 = Progression::make(2, 1);
    const auto zero = make_farey_point(1, 4, p2);
    const i64 N = 4096;
    const double err = major_arc_error(t, N, p2, zero, 2);
    const i64 halfsteps = arc_half_steps(N, 2, 64);
    const auto local = a_hat_local(t, N, p2, 0.25, halfsteps, 64);
    double sup = 0.0;
    for (const auto& v : local) sup = std::max(sup, std::abs(v));
    EXPECT_DOUBLE_EQ(err, sup);
    EXPECT_TRUE(std::isfinite(err));
    EXPECT_LT(major_arc_error(t, 1 << 18, p2, zero, 2), err);
}

TEST(ApproxError, DecaysWithScale) {
    const auto& t = tables();
    const auto prog = Progression::make(1, 0);
    const auto eta = CutoffSpec::smooth();
    const auto e1 = approx_error_profile(t, 1 << 12, prog, 16, eta, 1 << 14);
    const auto e2 = approx_error_profile(t, 1 << 18, prog, 16, eta, 1 << 20);
    EXPECT_LT(e2.sup_error, e1.sup_error);
    EXPECT_EQ(e1.residual.M, 1 << 14);
    EXPECT_DOUBLE_EQ(e1.sup_error, e1.residual.sup_abs());
}

TEST(Grid, Limits) {
    EXPECT_THROW(require_grid(1000), std::invalid_argument);
    EXPECT_THROW(require_grid(kMaxGridSize * 2), std::length_error);
    EXPECT_NO_THROW(require_grid(1 << 10));
    EXPECT_NEAR(wrap_unit(0.75), -0.25, 1e-15);
    EXPECT_NEAR(wrap_unit(-0.5), -0.5, 1e-15);
    EXPECT_NEAR(dist_to_int(2.9), 0.1, 1e-12);
}
