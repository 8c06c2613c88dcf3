#include "oblique/penalize.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <ostream>

#include "oblique/errors.hpp"
#include "oblique/format.hpp"

namespace oblique {

ModeMatrix lower_penalty_density(const ModeMatrix& y, const CostTables& costs, double n) {
    ModeMatrix out(y.rows(), y.cols());
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (std::size_t j = 0; j < y.cols(); ++j) {
            double s = 0.0;
            for (std::size_t jp = 0; jp < y.cols(); ++jp)
                s += std::max(-(y(i, j) - y(i, jp) + costs.l(j, jp)), 0.0);
            out(i, j) = n * s;
        }
    return out;
}

ModeMatrix upper_penalty_density(const ModeMatrix& y, const CostTables& costs, double m) {
    ModeMatrix out(y.rows(), y.cols());
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (std::size_t j = 0; j < y.cols(); ++j) {
            double s = 0.0;
            for (std::size_t ip = 0; ip < y.rows(); ++ip)
                s += std::max(y(i, j) - y(ip, j) - costs.k(i, ip), 0.0);
            out(i, j) = m * s;
        }
    return out;
}

namespace {

void prepare(const GameSpec& spec, const PathTree& tree, double n, double m) {
    const ValidationReport report = validate_game_spec(spec);
    if (!report.ok()) throw ConfigError("game specification rejected: " + report.summary());
    if (!(n >= 0.0) || !(m >= 0.0) || !std::isfinite(n) || !std::isfinite(m))
        throw UsageError("penalty levels must be finite and >= 0");
    check_contraction(tree, Driver::raw(spec));
    check_terminal_in_domain(tree, spec, 1e-12);
}

/// Left-rectangle integral of density along paths.
ModeField integrate(const PathTree& tree, const ModeField& density) {
    ModeField out(tree.node_count(), density.m1(), density.m2());
    for (std::size_t node = 0; node < tree.interior_count(); ++node)
        for (std::uint32_t c : tree.children(node))
            for (std::size_t k = 0; k < out.at(node).size(); ++k)
                out.at(c)[k] = out.at(node)[k] + tree.dt() * density.at(node)[k];
    return out;
}

}  // namespace

PenalizedSolution solve_penalized(const GameSpec& spec, const PathTree& tree, double n,
                                  const StepOptions& opts) {
    prepare(spec, tree, n, 0.0);
    const std::size_t m1 = spec.m1(), m2 = spec.m2(), nodes = tree.node_count();
    const Driver driver = Driver::penalized(spec, n);
    PenalizedSolution sol;
    sol.n = n;
    sol.Y = ModeField(nodes, m1, m2);
    sol.Z.assign(tree.dimension(), ModeField(nodes, m1, m2));
    sol.dK = ModeField(nodes, m1, m2);
    sol.beta = ModeField(nodes, m1, m2);
    for (std::size_t leaf = tree.level_offset(tree.steps()); leaf < nodes; ++leaf) {
        const ModeMatrix xi = terminal_at(tree, spec.terminal, leaf);
        sol.Y.set(leaf, xi);
        sol.beta.set(leaf, lower_penalty_density(xi, spec.costs, n));
    }

    std::mutex mu;
    for_each_node_backward(tree, [&](std::size_t node) {
        StepResult s = bsde_step(tree, node, sol.Y, driver, opts);
        ModeMatrix y(m1, m2);
        for (std::size_t i = 0; i < m1; ++i)
            for (std::size_t j = 0; j < m2; ++j) {
                double v = s.y(i, j);
                for (std::size_t ip = 0; ip < m1; ++ip) v = std::min(v, s.y(ip, j) + spec.costs.k(i, ip));
                y(i, j) = v;
                sol.dK(node, i, j) = s.y(i, j) - v;
            }
        sol.Y.set(node, y);
        for (std::size_t p = 0; p < s.z.size(); ++p) sol.Z[p].set(node, s.z[p]);
        sol.beta.set(node, lower_penalty_density(y, spec.costs, n));
        std::lock_guard lock(mu);
        sol.max_iterations = std::max(sol.max_iterations, s.iterations);
    });
    if (!tree.recombining()) {
        sol.L = integrate(tree, sol.beta);
        const ModeField no_push(nodes, m1, m2);
        ModeField unused;
        accumulate_pushes(tree, sol.dK, no_push, sol.K, unused);
    }
    return sol;
}

DoublePenalizedSolution solve_double_penalized(const GameSpec& spec, const PathTree& tree, double n,
                                               double m, const StepOptions& opts) {
    prepare(spec, tree, n, m);
    const std::size_t m1 = spec.m1(), m2 = spec.m2(), nodes = tree.node_count();
    const Driver driver = Driver::penalized(spec, n, m);
    DoublePenalizedSolution sol;
    sol.n = n;
    sol.m = m;
    sol.Y = ModeField(nodes, m1, m2);
    sol.Z.assign(tree.dimension(), ModeField(nodes, m1, m2));
    sol.alpha = ModeField(nodes, m1, m2);
    sol.beta = ModeField(nodes, m1, m2);
    for (std::size_t leaf = tree.level_offset(tree.steps()); leaf < nodes; ++leaf)
        sol.Y.set(leaf, terminal_at(tree, spec.terminal, leaf));

    std::mutex mu;
    for_each_node_backward(tree, [&](std::size_t node) {
        StepResult s = bsde_step(tree, node, sol.Y, driver, opts);
        sol.Y.set(node, s.y);
        for (std::size_t p = 0; p < s.z.size(); ++p) sol.Z[p].set(node, s.z[p]);
        std::lock_guard lock(mu);
        sol.max_iterations = std::max(sol.max_iterations, s.iterations);
    });
    for (std::size_t node = 0; node < nodes; ++node) {
        const ModeMatrix y = sol.Y.matrix(node);
        sol.alpha.set(node, upper_penalty_density(y, spec.costs, m));
        sol.beta.set(node, lower_penalty_density(y, spec.costs, n));
    }
    return sol;
}

bool ConvergenceReport::all_nonincreasing() const {
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.nonincreasing; });
}
bool ConvergenceReport::all_nondecreasing() const {
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.nondecreasing; });
}
bool ConvergenceReport::all_penalty_ok() const {
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.penalty_ok; });
}
bool ConvergenceReport::all_bounds_ok() const {
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.bounds_ok; });
}
bool ConvergenceReport::gaps_strictly_decreasing() const {
    for (std::size_t r = 1; r < rows.size(); ++r)
        if (!(rows[r].gap < rows[r - 1].gap)) return false;
    return true;
}

ConvergenceReport penalization_report(const GameSpec& spec, const PathTree& tree,
                                      std::vector<double> n_list, const StepOptions& opts,
                                      const RbsdeSolution* direct) {
    std::sort(n_list.begin(), n_list.end());
    n_list.erase(std::unique(n_list.begin(), n_list.end()), n_list.end());
    std::optional<RbsdeSolution> own;
    if (!direct) {
        RbsdeOptions ro;
        ro.step = opts;
        own = solve_rbsde(spec, tree, ro);
        direct = &*own;
    }

    double leaf_max = 0.0;
    for (std::size_t leaf = tree.level_offset(tree.steps()); leaf < tree.node_count(); ++leaf)
        leaf_max = std::max(leaf_max, direct->Y.matrix(leaf).max_abs());
    const double psi = spec.generator.sup_bound();
    const double T = tree.horizon();

    ConvergenceReport rep;
    rep.penalty_bound = 2.0 * psi + 1e-9;
    rep.lower_bound = -leaf_max - psi * T - 1e-9;
    rep.upper_bound = leaf_max + 3.0 * psi * T + 1e-9;
    rep.direct_root = direct->Y.matrix(0);

    std::optional<PenalizedSolution> prev;
    for (double n : n_list) {
        PenalizedSolution cur = solve_penalized(spec, tree, n, opts);
        ConvergenceRow row;
        row.n = n;
        row.root = cur.Y.matrix(0);
        row.gap = max_abs_diff(cur.Y, direct->Y);
        row.y_min = *std::min_element(cur.Y.values().begin(), cur.Y.values().end());
        row.y_max = *std::max_element(cur.Y.values().begin(), cur.Y.values().end());
        row.bounds_ok = row.y_min >= rep.lower_bound && row.y_max <= rep.upper_bound;
        // Per pair (j, j'), not the beta sum over j'.
        for (std::size_t node = 0; node < tree.node_count(); ++node)
            for (std::size_t i = 0; i < spec.m1(); ++i)
                for (std::size_t j = 0; j < spec.m2(); ++j)
                    for (std::size_t jp = 0; jp < spec.m2(); ++jp)
                        row.penalty_stat = std::max(
                            row.penalty_stat,
                            n * std::max(-(cur.Y(node, i, j) - cur.Y(node, i, jp) + spec.costs.l(j, jp)), 0.0));
        row.penalty_ok = row.penalty_stat <= rep.penalty_bound;
        if (prev) {
            for (std::size_t k = 0; k < cur.Y.values().size(); ++k) {
                const double d = cur.Y.values()[k] - prev->Y.values()[k];
                row.max_increase = std::max(row.max_increase, d);
                row.max_decrease = std::max(row.max_decrease, -d);
            }
            row.nonincreasing = row.max_increase <= rep.monotone_slack;
            row.nondecreasing = row.max_decrease <= rep.monotone_slack;
            const double pg = rep.rows.back().gap;
            if (pg > 0.0) row.gap_ratio = row.gap / pg;
        }
        rep.rows.push_back(std::move(row));
        prev = std::move(cur);
    }
    return rep;
}

DoublePenaltyReport double_penalty_report(const GameSpec& spec, const PathTree& tree, double n,
                                          std::vector<double> m_list, const StepOptions& opts) {
    std::sort(m_list.begin(), m_list.end());
    m_list.erase(std::unique(m_list.begin(), m_list.end()), m_list.end());
    const PenalizedSolution base = solve_penalized(spec, tree, n, opts);
    DoublePenaltyReport rep;
    rep.n = n;
    std::optional<DoublePenalizedSolution> prev;
    for (double m : m_list) {
        DoublePenalizedSolution s = solve_double_penalized(spec, tree, n, m, opts);
        DoubleRow row;
        row.m = m;
        row.root = s.Y.matrix(0);
        for (double a : s.alpha.values()) row.alpha_max = std::max(row.alpha_max, a);
        row.gap = max_abs_diff(s.Y, base.Y);
        if (prev) row.change = max_abs_diff(s.Y, prev->Y);
        rep.rows.push_back(std::move(row));
        prev = std::move(s);
    }
    return rep;
}

namespace {

void root_header(std::ostream& os, const ModeMatrix& root) {
    for (std::size_t i = 0; i < root.rows(); ++i)
        for (std::size_t j = 0; j < root.cols(); ++j) os << ",Y_" << i + 1 << '_' << j + 1;
}

}  // namespace

void write_convergence_csv(std::ostream& os, const ConvergenceReport& r) {
    os << "n";
    root_header(os, r.direct_root);
    os << ",nonincreasing,nondecreasing,max_decrease,max_increase,penalty_stat,penalty_bound,y_min,y_max,"
          "gap,gap_ratio\n";
    for (const ConvergenceRow& row : r.rows) {
        os << fmt_num(row.n);
        for (double v : row.root.values()) os << ',' << fmt_num(v);
        os << ',' << row.nonincreasing << ',' << row.nondecreasing << ',' << fmt_num(row.max_decrease) << ','
           << fmt_num(row.max_increase) << ',' << fmt_num(row.penalty_stat) << ',' << fmt_num(r.penalty_bound)
           << ',' << fmt_num(row.y_min) << ',' << fmt_num(row.y_max) << ',' << fmt_num(row.gap) << ','
           << (row.gap_ratio ? fmt_num(*row.gap_ratio) : std::string()) << '\n';
    }
}

void write_double_penalty_csv(std::ostream& os, const DoublePenaltyReport& r) {
    if (r.rows.empty()) return;
    os << "n,m";
    root_header(os, r.rows.front().root);
    os << ",alpha_max,gap,change\n";
    for (const DoubleRow& row : r.rows) {
        os << fmt_num(r.n) << ',' << fmt_num(row.m);
        for (double v : row.root.values()) os << ',' << fmt_num(v);
        os << ',' << fmt_num(row.alpha_max) << ',' << fmt_num(row.gap) << ','
           << (row.change ? fmt_num(*row.change) : std::string()) << '\n';
    }
}

}  // namespace oblique
