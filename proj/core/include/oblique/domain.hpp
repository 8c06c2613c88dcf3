#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "oblique/mode_matrix.hpp"
#include "oblique/spec_model.hpp"

namespace oblique {

/// min_{i' != i} (y(i',j) + k(i,i')), or +inf when m1 == 1.
double upper_barrier(const ModeMatrix& y, const CostTables& costs, std::size_t i, std::size_t j);
/// max_{j' != j} (y(i,j') - l(j,j')), or -inf when m2 == 1.
double lower_barrier(const ModeMatrix& y, const CostTables& costs, std::size_t i, std::size_t j);

/// y(i,j) <= y(i',j) + k(i,i') + tol and y(i,j) >= y(i,j') - l(j,j') - tol everywhere.
bool in_qbar(const ModeMatrix& y, const CostTables& costs, double tol);

enum class SweepOrder {
    min_first,  ///< clamp down by the upper barrier, then up by the lower one
    max_first,  ///< the opposite
};

struct ProjectionOptions {
    double tol = 1e-12;
    SweepOrder order = SweepOrder::min_first;
    bool upper = true;  ///< enforce y <= upper barrier
    bool lower = true;  ///< enforce y >= lower barrier
};

struct Projection {
    ModeMatrix y;
    ModeMatrix dK;  ///< downward push per coordinate
    ModeMatrix dL;  ///< upward push per coordinate
    std::size_t sweeps = 0;
};

/// Oblique projection onto the closed domain for one cost table pair. Loop
/// statistics for the non-termination guard are computed once per instance.
class ObliqueDomain {
public:
    explicit ObliqueDomain(CostTables costs, std::size_t loop_cap = kDefaultLoopCap);

    const CostTables& costs() const noexcept { return costs_; }
    /// Smallest |alternating cost| over primary loops; nullopt when the grid
    /// has no loop or enumeration exceeded the cap.
    std::optional<double> min_loop_cost() const noexcept { return min_loop_cost_; }

    bool contains(const ModeMatrix& y, double tol) const { return in_qbar(y, costs_, tol); }

    /// Gauss-Seidel sweep, row-major over (i,j), of
    ///   y(i,j) <- median(lower_barrier(y), anchor(i,j), upper_barrier(y))
    /// where anchor is the input point, until no coordinate moves more than
    /// tol. dK = (anchor - y)^+, dL = (y - anchor)^+.
    /// Throws ConvergenceError naming the tightest loop when the sweep count
    /// exceeds m1*m2*ceil(range/min_loop_cost) + margin.
    Projection project(const ModeMatrix& y, const ProjectionOptions& opts = {}) const;

    std::size_t sweep_limit(const ModeMatrix& y) const;

private:
    CostTables costs_;
    std::optional<double> min_loop_cost_;
    std::string tightest_loop_;
};

/// One-shot convenience wrapper; enumerates loops on every call.
Projection project_oblique(const ModeMatrix& y, const CostTables& costs,
                           const ProjectionOptions& opts = {});

}  // namespace oblique
