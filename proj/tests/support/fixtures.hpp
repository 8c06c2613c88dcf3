#pragma once

#include <random>

#include "oblique/domain.hpp"
#include "oblique/spec_model.hpp"
#include "oracles.hpp"

namespace fixture {

using namespace oblique;

inline CostTables standard_costs() {
    return {ModeMatrix{{0, 1}, {1, 0}}, ModeMatrix{{0, 0.8}, {0.8, 0}}};
}

/// The bundled standard_2x2 scenario: k = 1, l = 0.8, psi = c_ij, affine terminal.
inline GameSpec standard_2x2() {
    return {standard_costs(), GeneratorSpec::mode_constant(ModeMatrix{{2, -2}, {-2, 2}}),
            TerminalSpec::affine(ModeMatrix(2, 2), ModeMatrix{{0.15, 0}, {0, -0.15}}), 1.0, 1};
}

/// Random admissible costs with every loop cost at least min_loop in magnitude.
inline CostTables random_costs(std::size_t m1, std::size_t m2, std::mt19937_64& rng,
                               double min_loop = 1e-3) {
    for (;;) {
        CostTables c{oracle::random_cost_table(m1, rng, 0.4, 0.75),
                     oracle::random_cost_table(m2, rng, 0.4, 0.75)};
        if (!validate_cost_matrices(c).ok()) continue;
        const auto s = summarize_loop_costs(c);
        if (!s || s->min_abs_cost >= min_loop) return c;
    }
}

/// Random game on an N-step tree: F1 or F2 generator and a leaf-table or
/// affine terminal, always inside the domain.
inline GameSpec random_game(std::size_t m1, std::size_t m2, std::size_t steps, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1, 1);
    GameSpec g;
    g.costs = random_costs(m1, m2, rng);
    ModeMatrix c(m1, m2);
    for (double& v : c.values()) v = 2.0 * u(rng);
    if (rng() % 2)
        g.generator = GeneratorSpec::mode_constant(c);
    else
        g.generator = GeneratorSpec::saturated_affine(0.5 * u(rng), {0.5 * u(rng)}, 1.0 + u(rng) * 0.5, c);
    const ObliqueDomain dom(g.costs);
    auto random_point = [&] {
        ModeMatrix y(m1, m2);
        for (double& v : y.values()) v = 1.5 * u(rng);
        return dom.project(y, {1e-15}).y;
    };
    if (rng() % 2) {
        std::vector<ModeMatrix> leaves;
        for (std::size_t l = 0; l < (std::size_t{1} << steps); ++l) leaves.push_back(random_point());
        g.terminal = TerminalSpec::leaf_table(std::move(leaves));
    } else {
        g.terminal = TerminalSpec::affine(random_point(), ModeMatrix(m1, m2, 0.3 * u(rng)));
    }
    return g;
}

}  // namespace fixture
