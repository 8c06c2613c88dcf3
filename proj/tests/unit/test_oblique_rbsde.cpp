#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "oblique/errors.hpp"
#include "oblique/oblique_rbsde.hpp"
#include "oracles.hpp"

using namespace oblique;

namespace {

GameSpec constant_game(ModeMatrix xi, CostTables c) {
    const std::size_t m1 = xi.rows(), m2 = xi.cols();
    return {std::move(c), GeneratorSpec::zero(m1, m2), TerminalSpec::constant(std::move(xi)), 1.0, 1};
}

/// Upper-only reflected system for column j, solved on its own: m1 scalar
/// BSDEs coupled only through y_i <= min_{i'} (y_i' + k(i,i')).
ModeField column_oracle(const GameSpec& s, const PathTree& t) {
    const std::size_t m1 = s.m1(), m2 = s.m2();
    ModeField Y(t.node_count(), m1, m2);
    for (std::size_t n = t.level_offset(t.steps()); n < t.node_count(); ++n)
        Y.set(n, s.terminal.evaluate(t.w_state(n), t.leaf_index(n)));
    for (std::size_t lvl = t.steps(); lvl-- > 0;)
        for (std::size_t n = t.level_offset(lvl); n < t.level_offset(lvl + 1); ++n)
            for (std::size_t j = 0; j < m2; ++j) {
                std::vector<double> ytil(m1);
                for (std::size_t i = 0; i < m1; ++i) {
                    double e = 0, z = 0;
                    for (std::size_t b = 0; b < t.branching(); ++b) {
                        const double v = Y(t.child(n, b), i, j);
                        e += v / t.branching();
                        z += v * t.increment(b, 0) / t.branching() / t.dt();
                    }
                    const std::vector<double> zz{z};
                    double y = e;
                    for (int it = 0; it < 500; ++it) y = e + t.dt() * s.generator(t.time(n), y, zz, i, j);
                    ytil[i] = y;
                }
                for (std::size_t i = 0; i < m1; ++i) {
                    double v = ytil[i];
                    for (std::size_t ip = 0; ip < m1; ++ip) v = std::min(v, ytil[ip] + s.costs.k(i, ip));
                    Y(n, i, j) = v;
                }
            }
    return Y;
}

}  // namespace

TEST(SolveRbsde, ConstantInteriorTerminalNeverPushes) {
    const ModeMatrix xi{{0.2, 0.1}, {-0.1, 0.3}};
    const GameSpec s = constant_game(xi, fixture::standard_costs());
    for (std::size_t N : {1u, 4u, 12u}) {
        const PathTree t = PathTree::build(N, 1, 1.0);
        const RbsdeSolution sol = solve_rbsde(s, t);
        for (std::size_t n = 0; n < t.node_count(); ++n) EXPECT_LE(max_abs_diff(sol.Y.matrix(n), xi), 1e-12);
        EXPECT_EQ(sol.K.max_abs(), 0.0);
        EXPECT_EQ(sol.L.max_abs(), 0.0);
    }
}

TEST(RbsdeStep, SingleClampOnTwoByOne) {
    GameSpec s = constant_game(ModeMatrix{{0}, {0}}, {ModeMatrix{{0, 1}, {1, 0}}, ModeMatrix{{0}}});
    const PathTree t = PathTree::build(1, 1, 1.0);
    ModeField next(t.node_count(), 2, 1);
    next.set(1, ModeMatrix{{3}, {0}});
    next.set(2, ModeMatrix{{3}, {0}});
    const RbsdeStep r = rbsde_step(t, 0, next, s, ObliqueDomain(s.costs));
    EXPECT_EQ(r.y, (ModeMatrix{{1}, {0}}));
    EXPECT_EQ(r.dK, (ModeMatrix{{2}, {0}}));
    EXPECT_EQ(r.dL.max_abs(), 0.0);
}

TEST(RbsdeStep, MixedViolationMatchesOracle) {
    const GameSpec s = constant_game(ModeMatrix(2, 2), fixture::standard_costs());
    const PathTree t = PathTree::build(1, 1, 1.0);
    ModeField next(t.node_count(), 2, 2);
    next.set(t.child(0, 1), ModeMatrix{{6, 0.5}, {0, 0}});
    next.set(t.child(0, 0), ModeMatrix{{2, -0.5}, {0, 0}});
    const RbsdeStep r = rbsde_step(t, 0, next, s, ObliqueDomain(s.costs));
    const ModeMatrix expect = oracle::random_sweep_projection(ModeMatrix{{4, 0}, {0, 0}}, s.costs, 7);
    EXPECT_LE(max_abs_diff(r.y, expect), 1e-12);
    EXPECT_DOUBLE_EQ(r.z[0](0, 0), (6.0 - 2.0) / 2.0);
}

TEST(SolveRbsde, ShiftEquivariance) {
    const GameSpec s = fixture::standard_2x2();
    GameSpec shifted = s;
    shifted.terminal = s.terminal.shifted(0.75);
    const PathTree t = PathTree::build(6, 1, 1.0);
    const RbsdeSolution a = solve_rbsde(s, t), b = solve_rbsde(shifted, t);
    for (std::size_t k = 0; k < a.Y.values().size(); ++k) {
        EXPECT_NEAR(b.Y.values()[k] - a.Y.values()[k], 0.75, 1e-12);
        EXPECT_NEAR(b.K.values()[k], a.K.values()[k], 1e-12);
        EXPECT_NEAR(b.L.values()[k], a.L.values()[k], 1e-12);
    }
}

TEST(SolveRbsde, TerminalOutsideDomainNamesLeafAndPair) {
    GameSpec s = fixture::standard_2x2();
    s.terminal = TerminalSpec::affine(ModeMatrix(2, 2), ModeMatrix{{2, 0}, {0, 0}});
    const PathTree t = PathTree::build(4, 1, 1.0);
    try {
        solve_rbsde(s, t);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("leaf 0"), std::string::npos) << msg;
        EXPECT_NE(msg.find("(1,1)"), std::string::npos) << msg;
    }
}

TEST(SolveRbsde, RejectsInvalidSpec) {
    GameSpec s = fixture::standard_2x2();
    s.costs.l = ModeMatrix{{0, 1}, {1, 0}};
    EXPECT_THROW(solve_rbsde(s, PathTree::build(2, 1, 1.0)), ConfigError);
}

TEST(SolveRbsde, InvariantsOnStandardInstance) {
    const GameSpec s = fixture::standard_2x2();
    const PathTree t = PathTree::build(8, 1, 1.0);
    const RbsdeSolution sol = solve_rbsde(s, t);
    EXPECT_TRUE(check_minimality(t, sol, s.costs, 1e-9).ok());
    EXPECT_GT(sol.dK.max_abs(), 0.0);
    EXPECT_GT(sol.dL.max_abs(), 0.0);
    for (std::size_t n = 0; n < t.node_count(); ++n) EXPECT_TRUE(in_qbar(sol.Y.matrix(n), s.costs, 1e-9));
    for (std::size_t n = 0; n < t.interior_count(); ++n)
        for (std::uint32_t c : t.children(n))
            for (std::size_t k = 0; k < 4; ++k) {
                EXPECT_GE(sol.K.at(c)[k], sol.K.at(n)[k]);
                EXPECT_GE(sol.L.at(c)[k], sol.L.at(n)[k]);
            }
    EXPECT_EQ(sol.K.matrix(0).max_abs(), 0.0);
}

TEST(SolveRbsde, MinimalityOnRandomInstances) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m1 = trial % 2 ? 3 : 2;
        const std::size_t N = 1 + trial % 6;
        const GameSpec s = fixture::random_game(m1, 2, N, rng);
        const PathTree t = PathTree::build(N, 1, 1.0);
        const RbsdeSolution sol = solve_rbsde(s, t);
        const ValidationReport r = check_minimality(t, sol, s.costs, 1e-8);
        EXPECT_TRUE(r.ok()) << "trial " << trial << ": " << r.summary();
    }
}

TEST(SolveRbsde, UpperOnlyReducesToIndependentColumns) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const GameSpec s = fixture::random_game(2, 2, 4, rng);
        const PathTree t = PathTree::build(4, 1, 1.0);
        RbsdeOptions opts;
        opts.projection.lower = false;
        const RbsdeSolution sol = solve_rbsde(s, t, opts);
        EXPECT_LE(max_abs_diff(sol.Y, column_oracle(s, t)), 1e-10) << "trial " << trial;
        EXPECT_EQ(sol.dL.max_abs(), 0.0);
    }
}

TEST(SolveRbsde, RecombiningMatchesFullTreeForMarkovData) {
    const GameSpec s = fixture::standard_2x2();
    const RbsdeSolution a = solve_rbsde(s, PathTree::build(10, 1, 1.0));
    const PathTree rt = PathTree::build_recombining(10, 1, 1.0);
    const RbsdeSolution b = solve_rbsde(s, rt);
    EXPECT_LE(max_abs_diff(a.Y.matrix(0), b.Y.matrix(0)), 1e-12);
    EXPECT_TRUE(b.K.empty());
    EXPECT_TRUE(check_minimality(rt, b, s.costs, 1e-9).ok());
}

TEST(SolutionCsv, OneRowPerNodeAndPair) {
    const GameSpec s = fixture::standard_2x2();
    const PathTree t = PathTree::build(2, 1, 1.0);
    std::ostringstream os;
    write_solution_csv(os, t, solve_rbsde(s, t));
    std::string line;
    std::istringstream in(os.str());
    std::getline(in, line);
    EXPECT_EQ(line, "node,level,w_1,i,j,Y,Z_1,dK,dL,K,L");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, t.node_count() * 4);
}
