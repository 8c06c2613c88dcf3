#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oblique/mode_matrix.hpp"

namespace oblique {

/// A (Player-I mode, Player-II mode) pair, zero-based.
struct ModePair {
    std::size_t i = 0;
    std::size_t j = 0;
    friend auto operator<=>(const ModePair&, const ModePair&) = default;
};

/// Switching cost tables of both players. k is m1 x m1, l is m2 x m2.
struct CostTables {
    ModeMatrix k;
    ModeMatrix l;

    std::size_t m1() const noexcept { return k.rows(); }
    std::size_t m2() const noexcept { return l.rows(); }
};

struct Violation {
    std::string clause;  ///< machine tag, e.g. "cost.strict_triangle"
    std::string detail;  ///< human-readable explanation
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    bool has(std::string_view clause) const;
    void merge(const ValidationReport& other);
    std::string summary() const;
};

/// Checks zero diagonals, positivity off the diagonal, and the strict
/// triangle inequality k(i,i')+k(i',i'') > k(i,i'') for both tables.
ValidationReport validate_cost_matrices(const CostTables& costs);

// ---------------------------------------------------------------------------
// Primary loops on the mode grid.

/// Closed walk stored without its repeated endpoint: (p_0, ..., p_{N-1}) with
/// p_N = p_0 implied. Consecutive pairs share a row or a column.
using Loop = std::vector<ModePair>;

inline constexpr std::size_t kDefaultLoopCap = 16;
inline constexpr double kDefaultLoopZeroTol = 1e-12;

/// Every simple cycle of the mode grid (rook graph) including back-and-forth
/// 2-cycles, one representative per rotation/reversal class: the
/// lexicographically smallest rotation over both orientations.
/// Throws CapExceededError when m1*m2 > cap.
std::vector<Loop> enumerate_primary_loops(std::size_t m1, std::size_t m2,
                                          std::size_t cap = kDefaultLoopCap);

/// Smallest rotation over both orientations.
Loop canonical_loop(const Loop& loop);

/// sum k(i_p,i_{p+1}) - sum l(j_p,j_{p+1}) along the loop (or its reverse).
double alternating_cost(const Loop& loop, const CostTables& costs, bool reversed = false);

std::string format_loop(const Loop& loop);

/// Reports every primary loop (either orientation) whose alternating cost has
/// magnitude <= zero_tol.
ValidationReport check_loop_costs(const CostTables& costs, double zero_tol = kDefaultLoopZeroTol,
                                  std::size_t cap = kDefaultLoopCap);

/// Smallest |alternating cost| over all primary loops in both orientations.
struct LoopCostSummary {
    double min_abs_cost = 0.0;
    Loop tightest;
    bool reversed = false;
};
std::optional<LoopCostSummary> summarize_loop_costs(const CostTables& costs,
                                                    std::size_t cap = kDefaultLoopCap);

// ---------------------------------------------------------------------------
// Generator and terminal families.

enum class GeneratorFamily { zero, mode_constant, saturated_affine };

/// psi(t, y, z, i, j). Families:
///  zero             psi = 0
///  mode_constant    psi = c_ij
///  saturated_affine psi = a*sat_M(y) + sum_p b_p*sat_M(z_p) + c_ij
class GeneratorSpec {
public:
    static GeneratorSpec zero(std::size_t m1, std::size_t m2);
    static GeneratorSpec mode_constant(ModeMatrix c);
    static GeneratorSpec saturated_affine(double a, std::vector<double> b, double saturation,
                                          ModeMatrix c);

    GeneratorFamily family() const noexcept { return family_; }
    const ModeMatrix& offsets() const noexcept { return c_; }
    double y_coefficient() const noexcept { return a_; }
    const std::vector<double>& z_coefficients() const noexcept { return b_; }
    double saturation() const noexcept { return saturation_; }

    double operator()(double t, double y, std::span<const double> z, std::size_t i,
                      std::size_t j) const noexcept;

    /// Lipschitz constant: |psi(y,z)-psi(y',z')| <= C(|y-y'| + |z-z'|_2).
    double lipschitz() const noexcept;
    /// Lipschitz constant in y alone.
    double y_lipschitz() const noexcept { return family_ == GeneratorFamily::saturated_affine ? std::abs(a_) : 0.0; }
    /// sup |psi| over all arguments.
    double sup_bound() const noexcept;
    /// True when psi does not depend on (y, z).
    bool state_independent() const noexcept;

    std::string_view family_name() const noexcept;

private:
    GeneratorFamily family_ = GeneratorFamily::zero;
    ModeMatrix c_;
    double a_ = 0.0;
    std::vector<double> b_;
    double saturation_ = 0.0;
};

enum class TerminalFamily { constant, affine, leaf_table };

/// xi_ij evaluated at a leaf. Families:
///  constant    xi = alpha
///  affine      xi = alpha + beta * W_T(1)
///  leaf_table  one explicit matrix per leaf of the non-recombining tree
class TerminalSpec {
public:
    static TerminalSpec constant(ModeMatrix alpha);
    static TerminalSpec affine(ModeMatrix alpha, ModeMatrix beta);
    static TerminalSpec leaf_table(std::vector<ModeMatrix> leaves);

    TerminalFamily family() const noexcept { return family_; }
    std::string_view family_name() const noexcept;
    bool markovian() const noexcept { return family_ != TerminalFamily::leaf_table; }
    std::size_t rows() const noexcept { return alpha_.rows(); }
    std::size_t cols() const noexcept { return alpha_.cols(); }

    const ModeMatrix& alpha() const noexcept { return alpha_; }
    const ModeMatrix& beta() const noexcept { return beta_; }
    const std::vector<ModeMatrix>& leaves() const noexcept { return leaves_; }

    /// leaf_index is the leaf's position within the last tree level; required
    /// for leaf tables only.
    ModeMatrix evaluate(std::span<const double> w_state,
                        std::optional<std::size_t> leaf_index) const;

    /// Same family, every entry shifted by gamma.
    TerminalSpec shifted(double gamma) const;

private:
    TerminalFamily family_ = TerminalFamily::constant;
    ModeMatrix alpha_;
    ModeMatrix beta_;
    std::vector<ModeMatrix> leaves_;
};

struct GameSpec {
    CostTables costs;
    GeneratorSpec generator;
    TerminalSpec terminal;
    double horizon = 1.0;
    std::size_t dimension = 1;

    std::size_t m1() const noexcept { return costs.m1(); }
    std::size_t m2() const noexcept { return costs.m2(); }
};

/// Shapes, positive horizon, generator/terminal dimensions, cost tables and loop costs.
ValidationReport validate_game_spec(const GameSpec& spec, double loop_zero_tol = kDefaultLoopZeroTol,
                                    std::size_t loop_cap = kDefaultLoopCap);

}  // namespace oblique
