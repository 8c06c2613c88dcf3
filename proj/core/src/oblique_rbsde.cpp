#include "oblique/oblique_rbsde.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <ostream>
#include <sstream>

#include "oblique/errors.hpp"
#include "oblique/format.hpp"

namespace oblique {

RbsdeStep rbsde_step(const PathTree& tree, std::size_t node, const ModeField& next_Y,
                     const GameSpec& spec, const ObliqueDomain& domain, const RbsdeOptions& opts) {
    StepResult s = bsde_step(tree, node, next_Y, Driver::raw(spec), opts.step);
    Projection p = domain.project(s.y, opts.projection);
    return {std::move(p.y), std::move(s.z), std::move(p.dK), std::move(p.dL), s.iterations, p.sweeps};
}

void check_terminal_in_domain(const PathTree& tree, const GameSpec& spec, double tol) {
    for (std::size_t n = tree.level_offset(tree.steps()); n < tree.node_count(); ++n) {
        const ModeMatrix xi = terminal_at(tree, spec.terminal, n);
        if (!xi.all_finite())
            throw DataError("terminal value is not finite at leaf " + std::to_string(tree.leaf_index(n)));
        for (std::size_t i = 0; i < xi.rows(); ++i)
            for (std::size_t j = 0; j < xi.cols(); ++j) {
                const double up = upper_barrier(xi, spec.costs, i, j);
                const double lo = lower_barrier(xi, spec.costs, i, j);
                if (xi(i, j) > up + tol || xi(i, j) < lo - tol) {
                    std::ostringstream os;
                    os << "terminal value outside the domain at leaf " << tree.leaf_index(n)
                       << ", mode pair (" << i + 1 << ',' << j + 1 << "): xi=" << xi(i, j)
                       << ", allowed [" << lo << ", " << up << "]";
                    throw DataError(os.str());
                }
            }
    }
}

void accumulate_pushes(const PathTree& tree, const ModeField& dK, const ModeField& dL,
                       ModeField& K, ModeField& L) {
    if (tree.recombining()) {
        K = ModeField();
        L = ModeField();
        return;
    }
    K = ModeField(tree.node_count(), dK.m1(), dK.m2());
    L = ModeField(tree.node_count(), dK.m1(), dK.m2());
    for (std::size_t node = 0; node < tree.interior_count(); ++node)
        for (std::uint32_t c : tree.children(node))
            for (std::size_t k = 0; k < K.at(node).size(); ++k) {
                K.at(c)[k] = K.at(node)[k] + dK.at(node)[k];
                L.at(c)[k] = L.at(node)[k] + dL.at(node)[k];
            }
}

RbsdeSolution solve_rbsde(const GameSpec& spec, const PathTree& tree, const RbsdeOptions& opts) {
    const ValidationReport report = validate_game_spec(spec);
    if (!report.ok()) throw ConfigError("game specification rejected: " + report.summary());
    check_contraction(tree, Driver::raw(spec));
    check_terminal_in_domain(tree, spec, opts.terminal_tol);

    const ObliqueDomain domain(spec.costs);
    const std::size_t m1 = spec.m1(), m2 = spec.m2(), nodes = tree.node_count();
    RbsdeSolution sol;
    sol.Y = ModeField(nodes, m1, m2);
    sol.Z.assign(tree.dimension(), ModeField(nodes, m1, m2));
    sol.dK = ModeField(nodes, m1, m2);
    sol.dL = ModeField(nodes, m1, m2);
    for (std::size_t n = tree.level_offset(tree.steps()); n < nodes; ++n)
        sol.Y.set(n, terminal_at(tree, spec.terminal, n));

    std::mutex mu;
    for_each_node_backward(tree, [&](std::size_t node) {
        RbsdeStep s = rbsde_step(tree, node, sol.Y, spec, domain, opts);
        sol.Y.set(node, s.y);
        for (std::size_t p = 0; p < s.z.size(); ++p) sol.Z[p].set(node, s.z[p]);
        sol.dK.set(node, s.dK);
        sol.dL.set(node, s.dL);
        std::lock_guard lock(mu);
        sol.max_iterations = std::max(sol.max_iterations, s.iterations);
        sol.max_sweeps = std::max(sol.max_sweeps, s.sweeps);
    });
    accumulate_pushes(tree, sol.dK, sol.dL, sol.K, sol.L);
    return sol;
}

ValidationReport check_minimality(const PathTree& tree, const RbsdeSolution& sol,
                                  const CostTables& costs, double tol) {
    ValidationReport report;
    auto where = [](std::size_t node, std::size_t i, std::size_t j) {
        std::ostringstream os;
        os << "node " << node << ", mode pair (" << i + 1 << ',' << j + 1 << ")";
        return os.str();
    };
    for (std::size_t node = 0; node < tree.node_count(); ++node) {
        const ModeMatrix y = sol.Y.matrix(node);
        for (std::size_t i = 0; i < y.rows(); ++i)
            for (std::size_t j = 0; j < y.cols(); ++j) {
                const double up = upper_barrier(y, costs, i, j);
                const double lo = lower_barrier(y, costs, i, j);
                const double dk = sol.dK(node, i, j), dl = sol.dL(node, i, j);
                if (y(i, j) > up + tol || y(i, j) < lo - tol)
                    report.violations.push_back({"domain", where(node, i, j) + " is outside the domain"});
                if (dk > tol && std::abs(y(i, j) - up) > tol) {
                    std::ostringstream os;
                    os << where(node, i, j) << ": dK=" << dk << " but Y - upper barrier = " << y(i, j) - up;
                    report.violations.push_back({"minimality.upper", os.str()});
                }
                if (dl > tol && std::abs(y(i, j) - lo) > tol) {
                    std::ostringstream os;
                    os << where(node, i, j) << ": dL=" << dl << " but Y - lower barrier = " << y(i, j) - lo;
                    report.violations.push_back({"minimality.lower", os.str()});
                }
                if (std::min(dk, dl) > 0.0)
                    report.violations.push_back({"complementarity", where(node, i, j) + " pushed both ways"});
            }
    }
    return report;
}

void write_solution_csv(std::ostream& os, const PathTree& tree, const RbsdeSolution& sol) {
    const std::size_t d = tree.dimension();
    os << "node,level";
    for (std::size_t p = 0; p < d; ++p) os << ",w_" << p + 1;
    os << ",i,j,Y";
    for (std::size_t p = 0; p < d; ++p) os << ",Z_" << p + 1;
    os << ",dK,dL,K,L\n";
    const bool cumulative = !sol.K.empty();
    for (std::size_t node = 0; node < tree.node_count(); ++node)
        for (std::size_t i = 0; i < sol.Y.m1(); ++i)
            for (std::size_t j = 0; j < sol.Y.m2(); ++j) {
                os << node << ',' << tree.level(node);
                for (double w : tree.w_state(node)) os << ',' << fmt_num(w);
                os << ',' << i + 1 << ',' << j + 1 << ',' << fmt_num(sol.Y(node, i, j));
                for (std::size_t p = 0; p < d; ++p) os << ',' << fmt_num(sol.Z[p](node, i, j));
                os << ',' << fmt_num(sol.dK(node, i, j)) << ',' << fmt_num(sol.dL(node, i, j)) << ','
                   << (cumulative ? fmt_num(sol.K(node, i, j)) : std::string("")) << ','
                   << (cumulative ? fmt_num(sol.L(node, i, j)) : std::string("")) << '\n';
            }
}

}  // namespace oblique
