#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "oblique/bsde_core.hpp"
#include "oblique/lattice.hpp"
#include "oblique/oblique_rbsde.hpp"
#include "oblique/spec_model.hpp"

namespace oblique {

enum class Player { one, two };

/// Feedback action table (node, i, j) -> next own mode, for interior nodes.
/// The action equal to the player's current mode means "stay".
class FeedbackStrategy {
public:
    FeedbackStrategy() = default;
    /// All-stay table.
    FeedbackStrategy(Player player, std::size_t interior_nodes, std::size_t m1, std::size_t m2);

    static FeedbackStrategy stay(Player player, const PathTree& tree, std::size_t m1, std::size_t m2);
    /// Always move to (or stay in) `mode`.
    static FeedbackStrategy constant(Player player, const PathTree& tree, std::size_t m1,
                                     std::size_t m2, std::size_t mode);
    /// Each entry switches with probability switch_prob, to a uniformly drawn other mode.
    static FeedbackStrategy random(Player player, const PathTree& tree, std::size_t m1, std::size_t m2,
                                   std::mt19937_64& rng, double switch_prob = 0.3);
    /// Myopic choice against frozen opponent: Player I minimizes
    /// psi(t,0,0,i',j)(T-t) + k(i,i'), Player II maximizes psi(t,0,0,i,j')(T-t) - l(j,j').
    static FeedbackStrategy greedy(Player player, const PathTree& tree, const GameSpec& spec);

    Player player() const noexcept { return player_; }
    std::size_t interior_nodes() const noexcept { return nodes_; }
    std::size_t m1() const noexcept { return m1_; }
    std::size_t m2() const noexcept { return m2_; }
    std::size_t own_modes() const noexcept { return player_ == Player::one ? m1_ : m2_; }
    std::size_t entries() const noexcept { return actions_.size(); }

    std::size_t action(std::size_t node, std::size_t i, std::size_t j) const {
        return actions_[(node * m1_ + i) * m2_ + j];
    }
    void set(std::size_t node, std::size_t i, std::size_t j, std::size_t mode);
    bool moves(std::size_t node, std::size_t i, std::size_t j) const {
        return action(node, i, j) != (player_ == Player::one ? i : j);
    }
    /// Raw access by flat index (node*m1 + i)*m2 + j.
    std::size_t raw(std::size_t k) const { return actions_[k]; }
    void set_raw(std::size_t k, std::size_t mode) { actions_[k] = static_cast<std::uint8_t>(mode); }

    std::string label;

    /// Rows "node,i,j,action" with 1-based modes, header first.
    void write(std::ostream& os) const;
    static FeedbackStrategy read(std::istream& is, Player player, std::size_t interior_nodes,
                                 std::size_t m1, std::size_t m2);

private:
    Player player_ = Player::one;
    std::size_t nodes_ = 0;
    std::size_t m1_ = 0;
    std::size_t m2_ = 0;
    std::vector<std::uint8_t> actions_;
};

/// Instantaneous switching at one node starting from a mode pair: Player I
/// moves while its action differs from its mode, then Player II, repeating
/// until both stay. A revisited pair is an infinite switching loop whose
/// payoff is +inf or -inf by the sign of the loop's alternating cost.
struct Cascade {
    ModePair rest;
    double cost_a = 0.0;  ///< sum of k over Player-I switches
    double cost_b = 0.0;  ///< sum of l over Player-II switches
    std::size_t switches_a = 0;
    std::size_t switches_b = 0;
    int infinite = 0;  ///< +1 / -1 for an infinite loop, else 0
};

Cascade run_cascade(std::size_t node, ModePair start, const FeedbackStrategy& a,
                    const FeedbackStrategy& b, const CostTables& costs);

/// U over (node, i, j): value of the switched BSDE when both players follow
/// their feedback tables from mode pair (i, j) at that node. dA, dB are the
/// costs paid in the node's switching cascade. U may hold +-inf.
struct SwitchedValue {
    ModeField U;
    ModeField dA;
    ModeField dB;
};

SwitchedValue eval_switched(const GameSpec& spec, const PathTree& tree, const FeedbackStrategy& a,
                            const FeedbackStrategy& b, const StepOptions& opts = {});

/// Realized modes and costs along one root-to-leaf path of a
/// non-recombining tree.
struct PathRecord {
    std::vector<ModePair> rest;  ///< mode pair governing each step
    ModePair terminal_modes;
    double A = 0.0;
    double B = 0.0;
    std::size_t switches_a = 0;
    std::size_t switches_b = 0;
    int infinite = 0;
};

PathRecord simulate_path(const PathTree& tree, const FeedbackStrategy& a, const FeedbackStrategy& b,
                         const CostTables& costs, ModePair start, std::size_t leaf_index);

/// Where both triggers fire at a pair, Player I switches and Player II stays.
/// `priority` stores Player II's trigger anyway and relies on the cascade
/// letting Player I move first; `literal` writes "stay" into Player II's
/// table, which also freezes Player II when Player I deviates by not switching.
enum class TieRule { priority, literal };

/// Resets to "stay" every entry of s that closes an instantaneous switching
/// loop against the opponent, node by node, until no start pair loops.
/// Returns the number of entries reset.
std::size_t remove_switching_loops(FeedbackStrategy& s, const FeedbackStrategy& opponent);

/// Trigger-based strategies read off a reflected solution.
struct SaddleStrategies {
    FeedbackStrategy a;
    FeedbackStrategy b;
};

SaddleStrategies extract_saddle(const PathTree& tree, const ModeField& Y, const CostTables& costs,
                                double tol = 1e-10, TieRule tie = TieRule::priority);

struct SaddleRow {
    std::string strategy;  ///< label of the deviating strategy
    Player deviator = Player::two;
    ModePair start;
    double value = 0.0;  ///< U at the root
    double slack = 0.0;  ///< >= 0 when the inequality holds
};

struct SaddleViolation {
    std::string description;
    std::string strategy_dump;
};

struct SaddleReport {
    double tol = 0.0;
    ModeMatrix Y_root;
    ModeMatrix U_star;  ///< U^{a*,b*} at the root
    std::vector<SaddleRow> rows;
    std::vector<SaddleViolation> violations;

    bool ok() const noexcept { return violations.empty(); }
    double max_value_error() const;
};

struct SaddleOptions {
    double tol = 1e-8;          ///< inequality tolerance
    double trigger_tol = 1e-10; ///< switching trigger tolerance
    std::size_t catalog_size = 200;
    std::uint64_t seed = 0;
    double switch_prob = 0.3;
    TieRule tie = TieRule::priority;
    StepOptions step;
};

/// Checks U^{a*,b*} = Y, U^{a*,b} <= Y + tol and U^{a,b*} >= Y - tol at the
/// root for every start pair, over a catalog of stay, constant, greedy and
/// catalog_size seeded random strategies per player.
SaddleReport verify_saddle(const GameSpec& spec, const PathTree& tree, const ModeField& Y,
                           const SaddleOptions& opts = {});

/// Number of feedback tables of a player on the tree, saturating at SIZE_MAX.
std::size_t strategy_count(Player player, const PathTree& tree, std::size_t m1, std::size_t m2);

/// Calls fn on every feedback table of the player (mixed-radix order).
/// Throws SizingError when the count exceeds cap.
void for_each_strategy(Player player, const PathTree& tree, std::size_t m1, std::size_t m2,
                       std::size_t cap, const std::function<void(const FeedbackStrategy&)>& fn);

inline constexpr std::size_t kDefaultStrategyCap = std::size_t{1} << 22;

struct ExhaustiveSaddle {
    ModeMatrix Y_root;
    ModeMatrix max_over_b;  ///< max_b U^{a*,b}(root)
    ModeMatrix min_over_a;  ///< min_a U^{a,b*}(root)
    std::size_t tables_b = 0;
    std::size_t tables_a = 0;
};

ExhaustiveSaddle exhaustive_saddle(const GameSpec& spec, const PathTree& tree, const ModeField& Y,
                                   double trigger_tol = 1e-10, std::size_t cap = kDefaultStrategyCap,
                                   const StepOptions& opts = {}, TieRule tie = TieRule::priority);

enum class LowerPush {
    own,     ///< the system's own minimal upward push (Player II best response)
    frozen,  ///< add the dL increments of a reflected solution instead
};

/// Value of the lower-reflected system for a fixed Player-I table: Player II
/// best-responds, i.e. at each node U(i,j) = k + U(a(i,j), j) when a moves,
/// otherwise max(step value, max_{j'} U(i,j') - l(j,j')). Values may be +inf.
ModeField solve_lower_reflected(const GameSpec& spec, const PathTree& tree, const FeedbackStrategy& a,
                                LowerPush push = LowerPush::own, const RbsdeSolution* frozen = nullptr,
                                const StepOptions& opts = {});

/// min over every Player-I table of solve_lower_reflected at the root, per
/// start pair. Throws SizingError when the table count exceeds cap.
ModeMatrix brute_force_values(const GameSpec& spec, const PathTree& tree,
                              std::size_t cap = kDefaultStrategyCap, const StepOptions& opts = {});
double brute_force_value(const GameSpec& spec, const PathTree& tree, ModePair start,
                         std::size_t cap = kDefaultStrategyCap, const StepOptions& opts = {});

/// strategy,deviator,i,j,value,slack
void write_saddle_csv(std::ostream& os, const SaddleReport& r);

}  // namespace oblique
