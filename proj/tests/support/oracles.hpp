#pragma once

// Independent reference implementations used by unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "oblique/mode_matrix.hpp"
#include "oblique/spec_model.hpp"

namespace oracle {

using oblique::CostTables;
using oblique::ModeMatrix;

/// Vertex ids v = i*m2 + j. A loop is a vertex cycle; the key is the
/// smallest of all rotations of the sequence and of its reverse.
inline std::vector<std::size_t> cycle_key(std::vector<std::size_t> cyc) {
    std::vector<std::size_t> best;
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t r = 0; r < cyc.size(); ++r) {
            std::rotate(cyc.begin(), cyc.begin() + 1, cyc.end());
            if (best.empty() || cyc < best) best = cyc;
        }
        std::reverse(cyc.begin(), cyc.end());
    }
    return best;
}

/// Closed walks whose consecutive pairs share a row or column and that
/// revisit no pair, found by testing every ordered vertex subset.
inline std::set<std::vector<std::size_t>> closed_walks(std::size_t m1, std::size_t m2) {
    const std::size_t n = m1 * m2;
    auto adjacent = [&](std::size_t u, std::size_t v) {
        return u != v && (u / m2 == v / m2 || u % m2 == v % m2);
    };
    std::set<std::vector<std::size_t>> out;
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        std::vector<std::size_t> verts;
        for (std::size_t v = 0; v < n; ++v)
            if (mask >> v & 1u) verts.push_back(v);
        if (verts.size() < 2) continue;
        std::vector<std::size_t> perm(verts.begin() + 1, verts.end());
        do {
            std::vector<std::size_t> walk{verts.front()};
            walk.insert(walk.end(), perm.begin(), perm.end());
            bool ok = true;
            for (std::size_t p = 0; p < walk.size() && ok; ++p)
                ok = adjacent(walk[p], walk[(p + 1) % walk.size()]);
            if (ok) out.insert(cycle_key(walk));
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return out;
}

/// Projection by Gauss-Seidel sweeps in freshly shuffled coordinate orders.
inline ModeMatrix random_sweep_projection(const ModeMatrix& anchor, const CostTables& c,
                                          std::uint64_t seed, double tol = 1e-14) {
    std::mt19937_64 rng(seed);
    ModeMatrix y = anchor;
    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), 0);
    const double inf = std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < 1000000; ++sweep) {
        std::shuffle(order.begin(), order.end(), rng);
        double moved = 0.0;
        for (std::size_t v : order) {
            const std::size_t i = v / y.cols(), j = v % y.cols();
            double up = inf, lo = -inf;
            for (std::size_t ip = 0; ip < y.rows(); ++ip)
                if (ip != i) up = std::min(up, y(ip, j) + c.k(i, ip));
            for (std::size_t jp = 0; jp < y.cols(); ++jp)
                if (jp != j) lo = std::max(lo, y(i, jp) - c.l(j, jp));
            double w = anchor(i, j);
            if (w > up) w = up;
            if (w < lo) w = lo;
            moved = std::max(moved, std::abs(w - y(i, j)));
            y(i, j) = w;
        }
        if (moved <= tol) return y;
    }
    return y;
}

/// Off-diagonal entries uniform in [lo, hi) with hi < 2 lo, so the strict
/// triangle inequality always holds.
inline ModeMatrix random_cost_table(std::size_t m, std::mt19937_64& rng, double lo = 1.0,
                                    double hi = 1.9) {
    std::uniform_real_distribution<double> u(lo, hi);
    ModeMatrix t(m, m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
            if (a != b) t(a, b) = u(rng);
    return t;
}

}  // namespace oracle
