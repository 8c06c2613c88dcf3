#include <gtest/gtest.h>

#include <random>

#include "oblique/domain.hpp"
#include "oblique/errors.hpp"
#include "oracles.hpp"

using namespace oblique;

namespace {

CostTables costs_2x1(double k) { return {ModeMatrix{{0, k}, {k, 0}}, ModeMatrix{{0}}}; }
CostTables costs_1x2(double l) { return {ModeMatrix{{0}}, ModeMatrix{{0, l}, {l, 0}}}; }
CostTables standard() { return {ModeMatrix{{0, 1}, {1, 0}}, ModeMatrix{{0, 0.8}, {0.8, 0}}}; }

CostTables random_admissible(std::size_t m1, std::size_t m2, std::mt19937_64& rng) {
    for (;;) {
        CostTables c{oracle::random_cost_table(m1, rng, 0.5, 0.95),
                     oracle::random_cost_table(m2, rng, 0.5, 0.95)};
        if (validate_cost_matrices(c).ok() && check_loop_costs(c, 1e-6).ok()) return c;
    }
}

}  // namespace

TEST(InQbar, Examples) {
    EXPECT_TRUE(in_qbar(ModeMatrix{{0.5}, {0}}, costs_2x1(1), 0));
    EXPECT_FALSE(in_qbar(ModeMatrix{{3}, {0}}, costs_2x1(1), 0));
    EXPECT_FALSE(in_qbar(ModeMatrix{{0, 3}}, costs_1x2(1), 0));
    EXPECT_TRUE(in_qbar(ModeMatrix{{1.0 + 1e-10}, {0}}, costs_2x1(1), 1e-9));
}

TEST(InQbar, ConstantShiftKeepsMembership) {
    ModeMatrix y{{0.3, 0.1}, {-0.2, 0.4}};
    ASSERT_TRUE(in_qbar(y, standard(), 0));
    for (double g : {-100.0, -1.5, 2.25, 1e6}) {
        ModeMatrix s = y;
        s += g;
        EXPECT_TRUE(in_qbar(s, standard(), 1e-9));
    }
}

TEST(Projection, IdentityOnDomain) {
    ModeMatrix y{{0.3, 0.1}, {-0.2, 0.4}};
    const Projection p = project_oblique(y, standard());
    EXPECT_EQ(p.y, y);
    EXPECT_EQ(p.dK.max_abs(), 0.0);
    EXPECT_EQ(p.dL.max_abs(), 0.0);
}

TEST(Projection, SingleUpperClamp) {
    const Projection p = project_oblique(ModeMatrix{{3}, {0}}, costs_2x1(1));
    EXPECT_EQ(p.y, (ModeMatrix{{1}, {0}}));
    EXPECT_EQ(p.dK, (ModeMatrix{{2}, {0}}));
    EXPECT_EQ(p.dL.max_abs(), 0.0);
}

TEST(Projection, SingleLowerClamp) {
    const Projection p = project_oblique(ModeMatrix{{0, 3}}, costs_1x2(1));
    EXPECT_EQ(p.y, (ModeMatrix{{2, 3}}));
    EXPECT_EQ(p.dL, (ModeMatrix{{2, 0}}));
    EXPECT_EQ(p.dK.max_abs(), 0.0);
}

TEST(Projection, MixedTwoByTwoMatchesRandomSweepOracle) {
    const ModeMatrix y{{4, 0}, {0, 0}};
    const Projection p = project_oblique(y, standard());
    // Frozen from the oracle: y11 clamps to y21 + 1, then y12 lifts to y11 - 0.8.
    const ModeMatrix expected{{1, 0.2}, {0, 0}};
    EXPECT_LE(max_abs_diff(p.y, expected), 1e-15);
    for (std::uint64_t seed = 0; seed < 20; ++seed)
        EXPECT_LE(max_abs_diff(oracle::random_sweep_projection(y, standard(), seed), expected), 1e-12);
    EXPECT_DOUBLE_EQ(p.dK(0, 0), 3.0);
    EXPECT_DOUBLE_EQ(p.dL(0, 1), 0.2);
}

TEST(Projection, PostconditionsOnRandomInstances) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3, 3);
    const double tol = 1e-12;
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t m1 = 1 + rng() % 3, m2 = 1 + rng() % 3;
        const CostTables c = random_admissible(m1, m2, rng);
        ModeMatrix y(m1, m2);
        for (double& v : y.values()) v = u(rng);
        const ObliqueDomain dom(c);
        const Projection p = dom.project(y, {tol});
        ASSERT_TRUE(in_qbar(p.y, c, 2 * tol)) << "trial " << trial;
        for (std::size_t i = 0; i < m1; ++i)
            for (std::size_t j = 0; j < m2; ++j) {
                EXPECT_EQ(p.dK(i, j) * p.dL(i, j), 0.0);
                EXPECT_NEAR(y(i, j) - p.dK(i, j) + p.dL(i, j), p.y(i, j), 1e-12);
                if (p.dK(i, j) > 0) EXPECT_NEAR(p.y(i, j), upper_barrier(p.y, c, i, j), 1e-10);
                if (p.dL(i, j) > 0) EXPECT_NEAR(p.y(i, j), lower_barrier(p.y, c, i, j), 1e-10);
            }
        const Projection again = dom.project(p.y, {tol});
        EXPECT_LE(again.dK.max_abs() + again.dL.max_abs(), 1e-12);
        const ModeMatrix ref = oracle::random_sweep_projection(y, c, trial);
        EXPECT_LE(max_abs_diff(ref, p.y), 1e-9) << "trial " << trial;
    }
}

TEST(Projection, SweepOrdersAgree) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int trial = 0; trial < 200; ++trial) {
        const CostTables c = random_admissible(3, 3, rng);
        ModeMatrix y(3, 3);
        for (double& v : y.values()) v = u(rng);
        const ObliqueDomain dom(c);
        const Projection a = dom.project(y, {1e-13, SweepOrder::min_first});
        const Projection b = dom.project(y, {1e-13, SweepOrder::max_first});
        ASSERT_LE(max_abs_diff(a.y, b.y), 1e-9) << "trial " << trial;
    }
}

TEST(Projection, UpperOnlyMatchesColumnFormula) {
    const CostTables c = standard();
    const ModeMatrix y{{4, -3}, {0, 2}};
    const Projection p = project_oblique(y, c, {1e-14, SweepOrder::min_first, true, false});
    for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t i = 0; i < 2; ++i) {
            double best = y(i, j);
            for (std::size_t ip = 0; ip < 2; ++ip) best = std::min(best, y(ip, j) + c.k(i, ip));
            EXPECT_DOUBLE_EQ(p.y(i, j), best);
        }
    EXPECT_EQ(p.dL.max_abs(), 0.0);
}

TEST(Projection, GuardNamesTheTightLoop) {
    // Zero-cost loop: the sweep drifts forever.
    const CostTables c{ModeMatrix{{0, 1}, {1, 0}}, ModeMatrix{{0, 1}, {1, 0}}};
    const ObliqueDomain dom(c);
    ASSERT_TRUE(dom.min_loop_cost().has_value());
    EXPECT_EQ(*dom.min_loop_cost(), 0.0);
    try {
        dom.project(ModeMatrix{{5, 0}, {0, -5}}, {0.0});
        SUCCEED() << "terminated";
    } catch (const ConvergenceError& e) {
        EXPECT_NE(std::string(e.what()).find("tightest loop"), std::string::npos);
    }
}

TEST(Projection, ShapeMismatchIsUsageError) {
    EXPECT_THROW(project_oblique(ModeMatrix(1, 1), standard()), UsageError);
}
