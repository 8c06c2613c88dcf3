#include "oblique/bsde_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "oblique/errors.hpp"

namespace oblique {

double Driver::lipschitz() const noexcept {
    return generator.lipschitz() + lower_penalty * static_cast<double>(costs.m2()) +
           upper_penalty * static_cast<double>(costs.m1());
}

double Driver::lower_term(const ModeMatrix& y, std::size_t i, std::size_t j) const {
    if (lower_penalty == 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t jp = 0; jp < y.cols(); ++jp)
        s += std::max(-(y(i, j) - y(i, jp) + costs.l(j, jp)), 0.0);
    return lower_penalty * s;
}

double Driver::upper_term(const ModeMatrix& y, std::size_t i, std::size_t j) const {
    if (upper_penalty == 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t ip = 0; ip < y.rows(); ++ip)
        s += std::max(y(i, j) - y(ip, j) - costs.k(i, ip), 0.0);
    return upper_penalty * s;
}

namespace {

void gather_z(const std::vector<ModeMatrix>& z, std::size_t i, std::size_t j, std::vector<double>& out) {
    out.resize(z.size());
    for (std::size_t p = 0; p < z.size(); ++p) out[p] = z[p](i, j);
}

}  // namespace

double Driver::operator()(double t, const ModeMatrix& y, const std::vector<ModeMatrix>& z,
                          std::size_t i, std::size_t j) const {
    std::vector<double> zij;
    gather_z(z, i, j, zij);
    return generator(t, y(i, j), zij, i, j) + lower_term(y, i, j) - upper_term(y, i, j);
}

void check_contraction(const PathTree& tree, const Driver& driver) {
    const double c = driver.generator.lipschitz();
    if (tree.dt() * c >= 1.0) {
        std::ostringstream os;
        os << "implicit step is not a contraction: dt*C = " << tree.dt() << "*" << c << " >= 1; use more than "
           << std::floor(tree.horizon() * c) << " time steps";
        throw SizingError(os.str());
    }
}

namespace {

ModeMatrix picard(double t, double dt, const ModeMatrix& anchor, const std::vector<ModeMatrix>& z,
                  const Driver& driver, const StepOptions& opts, std::size_t& iterations) {
    ModeMatrix y = anchor;
    std::vector<double> zij;
    iterations = 0;
    const bool one_shot = driver.generator.y_lipschitz() == 0.0;
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (std::size_t j = 0; j < y.cols(); ++j) {
            gather_z(z, i, j, zij);
            double v = anchor(i, j);
            std::size_t it = 0;
            for (;;) {
                const double w = anchor(i, j) + dt * driver.generator(t, v, zij, i, j);
                ++it;
                const double diff = std::abs(w - v);
                v = w;
                if (one_shot || diff <= opts.picard_tol) break;
                if (it >= opts.max_iter) {
                    std::ostringstream os;
                    os << "Picard iteration did not converge in " << opts.max_iter
                       << " iterations at mode pair (" << i + 1 << ',' << j + 1 << "), last change "
                       << diff;
                    throw ConvergenceError(os.str());
                }
            }
            y(i, j) = v;
            iterations = std::max(iterations, it);
        }
    return y;
}

/// Residual R(y) = y - anchor - dt * psi~(y).
double residual_at(double t, double dt, const ModeMatrix& y, const ModeMatrix& anchor,
                   const std::vector<double>& zij, const Driver& driver, std::size_t i, std::size_t j) {
    return y(i, j) - anchor(i, j) -
           dt * (driver.generator(t, y(i, j), zij, i, j) + driver.lower_term(y, i, j) -
                 driver.upper_term(y, i, j));
}

bool newton(double t, double dt, const ModeMatrix& anchor, const std::vector<ModeMatrix>& z,
            const Driver& driver, const StepOptions& opts, ModeMatrix& y, std::size_t& iterations) {
    const std::size_t m1 = anchor.rows(), m2 = anchor.cols(), n = m1 * m2;
    const CostTables& c = driver.costs;
    const double a = driver.generator.family() == GeneratorFamily::saturated_affine
                         ? driver.generator.y_coefficient()
                         : 0.0;
    const double sat = driver.generator.saturation();
    std::vector<std::vector<double>> zs(n);
    for (std::size_t i = 0; i < m1; ++i)
        for (std::size_t j = 0; j < m2; ++j) gather_z(z, i, j, zs[i * m2 + j]);

    Eigen::MatrixXd J(n, n);
    Eigen::VectorXd R(n);
    y = anchor;
    for (iterations = 1; iterations <= opts.max_iter; ++iterations) {
        J.setIdentity();
        for (std::size_t i = 0; i < m1; ++i)
            for (std::size_t j = 0; j < m2; ++j) {
                const std::size_t r = i * m2 + j;
                R(r) = residual_at(t, dt, y, anchor, zs[r], driver, i, j);
                if (a != 0.0 && std::abs(y(i, j)) < sat) J(r, r) -= dt * a;
                if (driver.lower_penalty != 0.0)
                    for (std::size_t jp = 0; jp < m2; ++jp)
                        if (jp != j && y(i, jp) - c.l(j, jp) - y(i, j) > 0.0) {
                            J(r, r) += dt * driver.lower_penalty;
                            J(r, i * m2 + jp) -= dt * driver.lower_penalty;
                        }
                if (driver.upper_penalty != 0.0)
                    for (std::size_t ip = 0; ip < m1; ++ip)
                        if (ip != i && y(i, j) - y(ip, j) - c.k(i, ip) > 0.0) {
                            J(r, r) += dt * driver.upper_penalty;
                            J(r, ip * m2 + j) -= dt * driver.upper_penalty;
                        }
            }
        const Eigen::VectorXd delta = J.partialPivLu().solve(-R);
        if (!delta.allFinite()) return false;
        for (std::size_t r = 0; r < n; ++r) y.values()[r] += delta(r);
        if (delta.lpNorm<Eigen::Infinity>() <= opts.picard_tol) {
            for (std::size_t i = 0; i < m1; ++i)
                for (std::size_t j = 0; j < m2; ++j)
                    if (std::abs(residual_at(t, dt, y, anchor, zs[i * m2 + j], driver, i, j)) >
                        16.0 * opts.picard_tol)
                        return false;
            return true;
        }
    }
    return false;
}

void gauss_seidel(double t, double dt, const ModeMatrix& anchor, const std::vector<ModeMatrix>& z,
                  const Driver& driver, const StepOptions& opts, ModeMatrix& y, std::size_t& iterations) {
    namespace bt = boost::math::tools;
    const std::size_t sweep_cap = 1000 * opts.max_iter;
    std::vector<double> zij;
    for (std::size_t sweep = 1; sweep <= sweep_cap; ++sweep) {
        double moved = 0.0;
        for (std::size_t i = 0; i < y.rows(); ++i)
            for (std::size_t j = 0; j < y.cols(); ++j) {
                gather_z(z, i, j, zij);
                const double old = y(i, j);
                // g is strictly increasing in y_ij with slope >= 1 - dt*C > 0.
                auto g = [&](double v) {
                    y(i, j) = v;
                    return residual_at(t, dt, y, anchor, zij, driver, i, j);
                };
                double width = 1.0 + std::abs(old - anchor(i, j));
                double lo = old - width, hi = old + width;
                double glo = g(lo), ghi = g(hi);
                while (glo > 0.0) { width *= 2.0; lo = old - width; glo = g(lo); }
                while (ghi < 0.0) { width *= 2.0; hi = old + width; ghi = g(hi); }
                std::uintmax_t it = 200;
                auto [rlo, rhi] = bt::toms748_solve(g, lo, hi, glo, ghi, bt::eps_tolerance<double>(52), it);
                const double v = 0.5 * (rlo + rhi);
                y(i, j) = v;
                moved = std::max(moved, std::abs(v - old));
            }
        iterations = sweep;
        if (moved <= opts.picard_tol) return;
    }
    throw ConvergenceError("penalized implicit step: Gauss-Seidel did not converge in " +
                           std::to_string(sweep_cap) + " sweeps");
}

}  // namespace

ModeMatrix solve_implicit(double t, double dt, const ModeMatrix& anchor,
                          const std::vector<ModeMatrix>& z, const Driver& driver,
                          const StepOptions& opts, std::size_t& iterations) {
    if (!driver.coupled()) return picard(t, dt, anchor, z, driver, opts, iterations);
    ModeMatrix y;
    if (newton(t, dt, anchor, z, driver, opts, y, iterations)) return y;
    y = anchor;
    gauss_seidel(t, dt, anchor, z, driver, opts, y, iterations);
    return y;
}

StepResult bsde_step(const PathTree& tree, std::size_t node, const ModeField& next,
                     const Driver& driver, const StepOptions& opts) {
    check_contraction(tree, driver);
    StepResult out;
    const ModeMatrix expect = node_expectation(tree, node, next);
    out.z.reserve(tree.dimension());
    for (std::size_t p = 0; p < tree.dimension(); ++p)
        out.z.push_back(martingale_coefficient(tree, node, next, p));
    out.y = solve_implicit(tree.time(node), tree.dt(), expect, out.z, driver, opts, out.iterations);
    return out;
}

ModeMatrix terminal_at(const PathTree& tree, const TerminalSpec& terminal, std::size_t leaf) {
    if (!terminal.markovian() && tree.recombining())
        throw UsageError("leaf-table terminal needs the non-recombining tree");
    std::optional<std::size_t> index;
    if (!terminal.markovian()) {
        index = tree.leaf_index(leaf);
        if (*index >= terminal.leaves().size())
            throw DataError("leaf-table terminal has " + std::to_string(terminal.leaves().size()) +
                            " leaves but the tree has " + std::to_string(tree.level_size(tree.steps())));
    }
    return terminal.evaluate(tree.w_state(leaf), index);
}

BsdeSolution solve_system(const PathTree& tree, const Driver& driver, const TerminalSpec& terminal,
                          const StepOptions& opts) {
    check_contraction(tree, driver);
    const std::size_t m1 = terminal.rows(), m2 = terminal.cols();
    BsdeSolution sol;
    sol.Y = ModeField(tree.node_count(), m1, m2);
    sol.Z.assign(tree.dimension(), ModeField(tree.node_count(), m1, m2));
    const std::size_t leaves = tree.level_offset(tree.steps());
    for (std::size_t n = leaves; n < tree.node_count(); ++n) sol.Y.set(n, terminal_at(tree, terminal, n));

    std::mutex mu;
    for_each_node_backward(tree, [&](std::size_t node) {
        StepResult s = bsde_step(tree, node, sol.Y, driver, opts);
        sol.Y.set(node, s.y);
        for (std::size_t p = 0; p < s.z.size(); ++p) sol.Z[p].set(node, s.z[p]);
        std::lock_guard lock(mu);
        sol.max_iterations = std::max(sol.max_iterations, s.iterations);
    });
    return sol;
}

}  // namespace oblique
