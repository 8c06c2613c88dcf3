#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "oblique/lattice.hpp"
#include "oblique/mode_matrix.hpp"
#include "oblique/parallel.hpp"
#include "oblique/spec_model.hpp"

namespace oblique {

/// psi~(t, y, z, i, j) = psi(t, y_ij, z_ij, i, j)
///                     + n * sum_{j'} (y_ij - y_ij' + l(j,j'))^-
///                     - m * sum_{i'} (y_ij - y_i'j - k(i,i'))^+
/// The penalty terms couple coordinates of one node.
struct Driver {
    GeneratorSpec generator;
    CostTables costs;
    double lower_penalty = 0.0;  ///< n
    double upper_penalty = 0.0;  ///< m

    static Driver raw(const GameSpec& spec) { return {spec.generator, spec.costs, 0.0, 0.0}; }
    static Driver penalized(const GameSpec& spec, double n, double m = 0.0) {
        return {spec.generator, spec.costs, n, m};
    }

    bool coupled() const noexcept { return lower_penalty != 0.0 || upper_penalty != 0.0; }
    /// C + n*m2 + m*m1.
    double lipschitz() const noexcept;

    /// n * sum_{j'} (y_ij - y_ij' + l(j,j'))^-
    double lower_term(const ModeMatrix& y, std::size_t i, std::size_t j) const;
    /// m * sum_{i'} (y_ij - y_i'j - k(i,i'))^+
    double upper_term(const ModeMatrix& y, std::size_t i, std::size_t j) const;

    /// z holds one matrix per Brownian component.
    double operator()(double t, const ModeMatrix& y, const std::vector<ModeMatrix>& z, std::size_t i,
                      std::size_t j) const;
};

struct StepOptions {
    double picard_tol = 1e-12;
    std::size_t max_iter = 200;
};

struct StepResult {
    ModeMatrix y;
    std::vector<ModeMatrix> z;
    std::size_t iterations = 0;
};

/// Throws SizingError unless dt*C < 1 for the generator part of the driver.
void check_contraction(const PathTree& tree, const Driver& driver);

/// Implicit Euler step y = E[next] + dt * psi~(t, y, z) with z_p = E[next dW_p]/dt.
/// Uncoupled drivers use Picard iteration from E[next]. Coupled (penalized)
/// drivers are solved exactly: semismooth Newton on the piecewise-smooth
/// system, falling back to nonlinear Gauss-Seidel with bracketed scalar solves.
StepResult bsde_step(const PathTree& tree, std::size_t node, const ModeField& next,
                     const Driver& driver, const StepOptions& opts = {});

/// Implicit solve of y = anchor + dt * psi~(t, y, z) at fixed z; shared with
/// callers that assemble the expectation themselves.
ModeMatrix solve_implicit(double t, double dt, const ModeMatrix& anchor,
                          const std::vector<ModeMatrix>& z, const Driver& driver,
                          const StepOptions& opts, std::size_t& iterations);

/// Terminal matrix at a leaf; throws UsageError for leaf tables on a
/// recombining lattice.
ModeMatrix terminal_at(const PathTree& tree, const TerminalSpec& terminal, std::size_t leaf);

struct BsdeSolution {
    ModeField Y;
    std::vector<ModeField> Z;  ///< one field per component; zero at leaves
    std::size_t max_iterations = 0;
};

BsdeSolution solve_system(const PathTree& tree, const Driver& driver, const TerminalSpec& terminal,
                          const StepOptions& opts = {});

/// Runs fn(node) over every interior node, deepest level first, parallel
/// within a level.
template <class Fn>
void for_each_node_backward(const PathTree& tree, Fn&& fn) {
    for (std::size_t t = tree.steps(); t-- > 0;) {
        const std::size_t lo = tree.level_offset(t);
        parallel_for(lo, lo + tree.level_size(t), [&](std::size_t node) { fn(node); });
    }
}

}  // namespace oblique
