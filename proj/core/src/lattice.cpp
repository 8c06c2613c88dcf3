#include "oblique/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "oblique/errors.hpp"

namespace oblique {

namespace {

std::size_t saturating_pow(std::size_t base, std::size_t exp) {
    std::size_t r = 1;
    for (std::size_t e = 0; e < exp; ++e) {
        if (base != 0 && r > std::numeric_limits<std::size_t>::max() / base)
            return std::numeric_limits<std::size_t>::max();
        r *= base;
    }
    return r;
}

std::size_t saturating_add(std::size_t a, std::size_t b) {
    return a > std::numeric_limits<std::size_t>::max() - b ? std::numeric_limits<std::size_t>::max()
                                                           : a + b;
}

void check_cap(std::size_t count, std::size_t cap, const char* what) {
    if (count > cap || count > std::numeric_limits<std::uint32_t>::max())
        throw SizingError(std::string(what) + ": " +
                          (count == std::numeric_limits<std::size_t>::max()
                               ? std::string("more than 2^64")
                               : std::to_string(count)) +
                          " nodes exceed the cap of " + std::to_string(cap));
}

}  // namespace

std::size_t PathTree::full_node_count(std::size_t steps, std::size_t dimension) {
    std::size_t total = 0;
    const std::size_t b = saturating_pow(2, dimension);
    for (std::size_t t = 0; t <= steps; ++t) total = saturating_add(total, saturating_pow(b, t));
    return total;
}

void PathTree::init_common(std::size_t steps, std::size_t dimension, double horizon) {
    if (steps < 1) throw UsageError("tree: need at least one time step");
    if (dimension < 1) throw UsageError("tree: Brownian dimension must be >= 1");
    if (dimension > 16) throw SizingError("tree: Brownian dimension above 16 is not supported");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw UsageError("tree: horizon must be > 0");
    steps_ = steps;
    dimension_ = dimension;
    branching_ = std::size_t{1} << dimension;
    horizon_ = horizon;
    dt_ = horizon / static_cast<double>(steps);
    sqrt_dt_ = std::sqrt(dt_);
}

PathTree PathTree::build(std::size_t steps, std::size_t dimension, double horizon,
                         std::size_t node_cap) {
    PathTree tree;
    tree.init_common(steps, dimension, horizon);
    const std::size_t total = full_node_count(steps, dimension);
    check_cap(total, node_cap, "non-recombining tree");

    const std::size_t B = tree.branching_;
    tree.offsets_.assign(steps + 2, 0);
    for (std::size_t t = 0, width = 1; t <= steps; ++t, width *= B)
        tree.offsets_[t + 1] = tree.offsets_[t] + width;

    tree.level_of_.resize(total);
    tree.w_.assign(total * dimension, 0.0);
    tree.children_.assign(tree.offsets_[steps] * B, 0);
    for (std::size_t t = 0; t <= steps; ++t)
        for (std::size_t n = tree.offsets_[t]; n < tree.offsets_[t + 1]; ++n)
            tree.level_of_[n] = static_cast<std::uint32_t>(t);

    for (std::size_t t = 0; t < steps; ++t) {
        const std::size_t off = tree.offsets_[t], next_off = tree.offsets_[t + 1];
        for (std::size_t q = 0; q < tree.offsets_[t + 1] - off; ++q) {
            const std::size_t node = off + q;
            for (std::size_t b = 0; b < B; ++b) {
                const std::size_t c = next_off + q * B + b;
                tree.children_[node * B + b] = static_cast<std::uint32_t>(c);
                for (std::size_t p = 0; p < dimension; ++p)
                    tree.w_[c * dimension + p] = tree.w_[node * dimension + p] + tree.increment(b, p);
            }
        }
    }
    return tree;
}

PathTree PathTree::build_recombining(std::size_t steps, std::size_t dimension, double horizon,
                                     std::size_t node_cap) {
    PathTree tree;
    tree.init_common(steps, dimension, horizon);
    tree.recombining_ = true;

    std::size_t total = 0;
    for (std::size_t t = 0; t <= steps; ++t) total = saturating_add(total, saturating_pow(t + 1, dimension));
    check_cap(total, node_cap, "recombining lattice");

    const std::size_t B = tree.branching_;
    tree.offsets_.assign(steps + 2, 0);
    for (std::size_t t = 0; t <= steps; ++t)
        tree.offsets_[t + 1] = tree.offsets_[t] + saturating_pow(t + 1, dimension);

    tree.level_of_.resize(total);
    tree.w_.assign(total * dimension, 0.0);
    tree.children_.assign(tree.offsets_[steps] * B, 0);

    // Level-t node q encodes up-move counts s_p in base (t+1); W_p = (2 s_p - t) sqrt(dt).
    std::vector<std::size_t> s(dimension);
    for (std::size_t t = 0; t <= steps; ++t) {
        for (std::size_t q = 0; q < tree.offsets_[t + 1] - tree.offsets_[t]; ++q) {
            const std::size_t node = tree.offsets_[t] + q;
            tree.level_of_[node] = static_cast<std::uint32_t>(t);
            std::size_t rest = q;
            for (std::size_t p = 0; p < dimension; ++p) {
                s[p] = rest % (t + 1);
                rest /= t + 1;
                tree.w_[node * dimension + p] =
                    (2.0 * static_cast<double>(s[p]) - static_cast<double>(t)) * tree.sqrt_dt_;
            }
            if (t == steps) continue;
            for (std::size_t b = 0; b < B; ++b) {
                std::size_t idx = 0, scale = 1;
                for (std::size_t p = 0; p < dimension; ++p) {
                    idx += (s[p] + ((b >> p) & 1u)) * scale;
                    scale *= t + 2;
                }
                tree.children_[node * B + b] = static_cast<std::uint32_t>(tree.offsets_[t + 1] + idx);
            }
        }
    }
    return tree;
}

std::size_t PathTree::leaf_index(std::size_t node) const {
    if (!is_leaf(node)) throw UsageError("leaf_index: node " + std::to_string(node) + " is not a leaf");
    return node - offsets_[steps_];
}

void ModeField::set(std::size_t node, const ModeMatrix& value) {
    if (value.rows() != m1_ || value.cols() != m2_) throw UsageError("ModeField::set: shape mismatch");
    std::copy(value.values().begin(), value.values().end(), at(node).begin());
}

bool ModeField::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double ModeField::max_abs() const noexcept {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

double max_abs_diff(const ModeField& a, const ModeField& b) {
    if (a.nodes() != b.nodes() || a.m1() != b.m1() || a.m2() != b.m2())
        throw UsageError("max_abs_diff: field shape mismatch");
    double m = 0.0;
    for (std::size_t n = 0; n < a.values().size(); ++n)
        m = std::max(m, std::abs(a.values()[n] - b.values()[n]));
    return m;
}

ModeMatrix node_expectation(const PathTree& tree, std::size_t node, const ModeField& next) {
    if (tree.is_leaf(node)) throw UsageError("node_expectation: node " + std::to_string(node) + " is a leaf");
    ModeMatrix out(next.m1(), next.m2());
    for (std::uint32_t c : tree.children(node)) {
        auto v = next.at(c);
        for (std::size_t k = 0; k < v.size(); ++k) out.values()[k] += v[k];
    }
    for (double& v : out.values()) v *= tree.branch_probability();
    return out;
}

ModeMatrix martingale_coefficient(const PathTree& tree, std::size_t node, const ModeField& next,
                                  std::size_t p) {
    if (tree.is_leaf(node))
        throw UsageError("martingale_coefficient: node " + std::to_string(node) + " is a leaf");
    if (p >= tree.dimension()) throw UsageError("martingale_coefficient: component out of range");
    ModeMatrix out(next.m1(), next.m2());
    auto kids = tree.children(node);
    for (std::size_t b = 0; b < kids.size(); ++b) {
        const double dw = tree.increment(b, p);
        auto v = next.at(kids[b]);
        for (std::size_t k = 0; k < v.size(); ++k) out.values()[k] += v[k] * dw;
    }
    const double scale = tree.branch_probability() / tree.dt();
    for (double& v : out.values()) v *= scale;
    return out;
}

}  // namespace oblique
