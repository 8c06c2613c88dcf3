#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "oblique/mode_matrix.hpp"

namespace oblique {

inline constexpr std::size_t kDefaultNodeCap = std::size_t{1} << 22;

/// Binary random-walk filtration: every branch moves each Brownian component
/// by +-sqrt(dt) with probability 2^-d. Branch b sets component p up when bit
/// p of b is 1. Nodes are numbered level by level from the root.
class PathTree {
public:
    /// Non-recombining tree: 2^(d*t) nodes at level t.
    static PathTree build(std::size_t steps, std::size_t dimension, double horizon,
                          std::size_t node_cap = kDefaultNodeCap);
    /// Recombining lattice: (t+1)^d nodes at level t, one per W-state. Only
    /// valid for Markovian data.
    static PathTree build_recombining(std::size_t steps, std::size_t dimension, double horizon,
                                      std::size_t node_cap = kDefaultNodeCap);

    /// Total node count of the non-recombining tree, saturating at SIZE_MAX.
    static std::size_t full_node_count(std::size_t steps, std::size_t dimension);

    bool recombining() const noexcept { return recombining_; }
    std::size_t steps() const noexcept { return steps_; }
    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t branching() const noexcept { return branching_; }
    double horizon() const noexcept { return horizon_; }
    double dt() const noexcept { return dt_; }
    double sqrt_dt() const noexcept { return sqrt_dt_; }
    double branch_probability() const noexcept { return 1.0 / static_cast<double>(branching_); }

    std::size_t node_count() const noexcept { return level_of_.size(); }
    std::size_t level_offset(std::size_t t) const { return offsets_.at(t); }
    std::size_t level_size(std::size_t t) const { return offsets_.at(t + 1) - offsets_.at(t); }
    std::size_t interior_count() const noexcept { return offsets_[steps_]; }

    std::size_t level(std::size_t node) const { return level_of_.at(node); }
    double time(std::size_t node) const { return static_cast<double>(level(node)) * dt_; }
    bool is_leaf(std::size_t node) const { return level(node) == steps_; }
    /// Position of a leaf within the last level.
    std::size_t leaf_index(std::size_t node) const;

    std::span<const double> w_state(std::size_t node) const {
        return {w_.data() + node * dimension_, dimension_};
    }
    /// Global index of child b; node must be interior.
    std::size_t child(std::size_t node, std::size_t b) const {
        return children_[node * branching_ + b];
    }
    std::span<const std::uint32_t> children(std::size_t node) const {
        return {children_.data() + node * branching_, branching_};
    }
    /// Increment of component p along branch b.
    double increment(std::size_t b, std::size_t p) const noexcept {
        return ((b >> p) & 1u) ? sqrt_dt_ : -sqrt_dt_;
    }

private:
    PathTree() = default;
    void init_common(std::size_t steps, std::size_t dimension, double horizon);

    bool recombining_ = false;
    std::size_t steps_ = 0;
    std::size_t dimension_ = 0;
    std::size_t branching_ = 0;
    double horizon_ = 0.0;
    double dt_ = 0.0;
    double sqrt_dt_ = 0.0;
    std::vector<std::size_t> offsets_;  // steps+2 entries
    std::vector<std::uint32_t> level_of_;
    std::vector<std::uint32_t> children_;
    std::vector<double> w_;
};

/// One m1 x m2 matrix per tree node, stored node-major.
class ModeField {
public:
    ModeField() = default;
    ModeField(std::size_t nodes, std::size_t m1, std::size_t m2, double fill = 0.0)
        : nodes_(nodes), m1_(m1), m2_(m2), data_(nodes * m1 * m2, fill) {}

    std::size_t nodes() const noexcept { return nodes_; }
    std::size_t m1() const noexcept { return m1_; }
    std::size_t m2() const noexcept { return m2_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t node, std::size_t i, std::size_t j) noexcept {
        return data_[(node * m1_ + i) * m2_ + j];
    }
    double operator()(std::size_t node, std::size_t i, std::size_t j) const noexcept {
        return data_[(node * m1_ + i) * m2_ + j];
    }
    std::span<double> at(std::size_t node) noexcept {
        return {data_.data() + node * m1_ * m2_, m1_ * m2_};
    }
    std::span<const double> at(std::size_t node) const noexcept {
        return {data_.data() + node * m1_ * m2_, m1_ * m2_};
    }
    ModeMatrix matrix(std::size_t node) const { return ModeMatrix::from_row_major(m1_, m2_, at(node)); }
    void set(std::size_t node, const ModeMatrix& value);

    std::span<const double> values() const noexcept { return data_; }
    std::span<double> values() noexcept { return data_; }

    bool all_finite() const noexcept;
    double max_abs() const noexcept;

private:
    std::size_t nodes_ = 0;
    std::size_t m1_ = 0;
    std::size_t m2_ = 0;
    std::vector<double> data_;
};

/// Max-norm distance between two fields of identical shape.
double max_abs_diff(const ModeField& a, const ModeField& b);

/// Probability-weighted average of the children's values.
ModeMatrix node_expectation(const PathTree& tree, std::size_t node, const ModeField& next);

/// E[value * dW_p] / dt over the children.
ModeMatrix martingale_coefficient(const PathTree& tree, std::size_t node, const ModeField& next,
                                  std::size_t p);

}  // namespace oblique
