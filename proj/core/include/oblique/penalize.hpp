#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "oblique/bsde_core.hpp"
#include "oblique/oblique_rbsde.hpp"

namespace oblique {

/// Lower barriers as a penalty driver with weight n, upper barriers by
/// reflection. beta = n * sum_{j'} (Y_ij - Y_ij' + l(j,j'))^- at each node;
/// L is its left-rectangle time integral along paths.
struct PenalizedSolution {
    double n = 0.0;
    ModeField Y;
    std::vector<ModeField> Z;
    ModeField dK;
    ModeField K;
    ModeField beta;
    ModeField L;
    std::size_t max_iterations = 0;
};

struct DoublePenalizedSolution {
    double n = 0.0;
    double m = 0.0;
    ModeField Y;
    std::vector<ModeField> Z;
    ModeField alpha;  ///< m * sum_{i'} (Y_ij - Y_i'j - k(i,i'))^+
    ModeField beta;
    std::size_t max_iterations = 0;
};

/// Implicit step with psi + n * sum (.)^-, then y_ij = min_{i'} (y~_i'j + k(i,i')).
PenalizedSolution solve_penalized(const GameSpec& spec, const PathTree& tree, double n,
                                  const StepOptions& opts = {});

/// Plain implicit solve with both penalties; no reflection.
DoublePenalizedSolution solve_double_penalized(const GameSpec& spec, const PathTree& tree, double n,
                                               double m, const StepOptions& opts = {});

/// n * sum_{j'} (y_ij - y_ij' + l(j,j'))^- for one matrix.
ModeMatrix lower_penalty_density(const ModeMatrix& y, const CostTables& costs, double n);
/// m * sum_{i'} (y_ij - y_i'j - k(i,i'))^+ for one matrix.
ModeMatrix upper_penalty_density(const ModeMatrix& y, const CostTables& costs, double m);

struct ConvergenceRow {
    double n = 0.0;
    ModeMatrix root;
    /// Y^{previous n} >= Y^{n} - slack at every node (stated direction).
    bool nonincreasing = true;
    /// Y^{previous n} <= Y^{n} + slack at every node (comparison direction).
    bool nondecreasing = true;
    double max_decrease = 0.0;  ///< max over nodes of (Y^{prev} - Y^{n})^+
    double max_increase = 0.0;  ///< max over nodes of (Y^{n} - Y^{prev})^+
    double penalty_stat = 0.0;  ///< max over nodes, pairs of n (Y_ij - Y_ij' + l)^-
    bool penalty_ok = true;
    double y_min = 0.0;
    double y_max = 0.0;
    bool bounds_ok = true;
    double gap = 0.0;  ///< ||Y^n - Y_direct||_inf over all nodes
    std::optional<double> gap_ratio;  ///< gap(n) / gap(previous n)
};

struct ConvergenceReport {
    double monotone_slack = 1e-10;
    double penalty_bound = 0.0;  ///< 2 ||psi||_inf + 1e-9
    double lower_bound = 0.0;    ///< -max leaf |xi| - ||psi||_inf T - 1e-9
    double upper_bound = 0.0;    ///<  max leaf |xi| + 3 ||psi||_inf T + 1e-9
    ModeMatrix direct_root;
    std::vector<ConvergenceRow> rows;  ///< sorted by n

    bool all_nonincreasing() const;
    bool all_nondecreasing() const;
    bool all_penalty_ok() const;
    bool all_bounds_ok() const;
    bool gaps_strictly_decreasing() const;
};

/// Solves every n in n_list (sorted ascending first). direct may be passed to
/// avoid re-solving the reflected system.
ConvergenceReport penalization_report(const GameSpec& spec, const PathTree& tree,
                                      std::vector<double> n_list, const StepOptions& opts = {},
                                      const RbsdeSolution* direct = nullptr);

struct DoubleRow {
    double m = 0.0;
    ModeMatrix root;
    double alpha_max = 0.0;
    double gap = 0.0;  ///< ||Y^{n,m} - Y^n||_inf over all nodes
    std::optional<double> change;  ///< ||Y^{n,m} - Y^{n,previous m}||_inf
};

struct DoublePenaltyReport {
    double n = 0.0;
    std::vector<DoubleRow> rows;  ///< sorted by m
};

DoublePenaltyReport double_penalty_report(const GameSpec& spec, const PathTree& tree, double n,
                                          std::vector<double> m_list, const StepOptions& opts = {});

/// n,Y_11..Y_m1m2,nonincreasing,nondecreasing,max_decrease,max_increase,
/// penalty_stat,penalty_bound,y_min,y_max,gap,gap_ratio
void write_convergence_csv(std::ostream& os, const ConvergenceReport& r);
/// n,m,Y_11..,alpha_max,gap,change
void write_double_penalty_csv(std::ostream& os, const DoublePenaltyReport& r);

}  // namespace oblique
