#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "oblique/bsde_core.hpp"
#include "oblique/domain.hpp"
#include "oblique/lattice.hpp"
#include "oblique/spec_model.hpp"

namespace oblique {

struct RbsdeOptions {
    StepOptions step;
    ProjectionOptions projection;
    /// Tolerance for the terminal-in-domain check.
    double terminal_tol = 1e-12;
};

/// Y, Z and the per-node pushes dK, dL. K and L are path-cumulative
/// (K(root) = 0, K(child) = K(node) + dK(node)) and are left empty on a
/// recombining lattice, where a node has no unique path.
struct RbsdeSolution {
    ModeField Y;
    std::vector<ModeField> Z;
    ModeField dK;
    ModeField dL;
    ModeField K;
    ModeField L;
    std::size_t max_iterations = 0;
    std::size_t max_sweeps = 0;
};

struct RbsdeStep {
    ModeMatrix y;
    std::vector<ModeMatrix> z;  ///< pre-projection coefficients
    ModeMatrix dK;
    ModeMatrix dL;
    std::size_t iterations = 0;
    std::size_t sweeps = 0;
};

/// BSDE step with the raw generator, then oblique projection.
RbsdeStep rbsde_step(const PathTree& tree, std::size_t node, const ModeField& next_Y,
                     const GameSpec& spec, const ObliqueDomain& domain, const RbsdeOptions& opts = {});

/// Throws DataError naming the first leaf and mode pair where the terminal
/// value leaves the domain.
void check_terminal_in_domain(const PathTree& tree, const GameSpec& spec, double tol);

RbsdeSolution solve_rbsde(const GameSpec& spec, const PathTree& tree, const RbsdeOptions& opts = {});

/// Accumulates K, L from dK, dL along every path. No-op on recombining lattices.
void accumulate_pushes(const PathTree& tree, const ModeField& dK, const ModeField& dL,
                       ModeField& K, ModeField& L);

/// Every push above tol must sit on its barrier within tol; every node must
/// lie in the domain within tol; dK*dL must vanish.
ValidationReport check_minimality(const PathTree& tree, const RbsdeSolution& sol,
                                  const CostTables& costs, double tol);

/// One row per node and mode pair:
/// node,level,w_1..w_d,i,j,Y,Z_1..Z_d,dK,dL,K,L
void write_solution_csv(std::ostream& os, const PathTree& tree, const RbsdeSolution& sol);

}  // namespace oblique
