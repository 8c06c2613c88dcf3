#include "oblique/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "oblique/errors.hpp"

namespace oblique {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kSweepMargin = 64;
constexpr std::size_t kUncappedSweepLimit = 1'000'000;
}  // namespace

double upper_barrier(const ModeMatrix& y, const CostTables& costs, std::size_t i, std::size_t j) {
    double up = kInf;
    for (std::size_t ip = 0; ip < y.rows(); ++ip)
        if (ip != i) up = std::min(up, y(ip, j) + costs.k(i, ip));
    return up;
}

double lower_barrier(const ModeMatrix& y, const CostTables& costs, std::size_t i, std::size_t j) {
    double lo = -kInf;
    for (std::size_t jp = 0; jp < y.cols(); ++jp)
        if (jp != j) lo = std::max(lo, y(i, jp) - costs.l(j, jp));
    return lo;
}

bool in_qbar(const ModeMatrix& y, const CostTables& costs, double tol) {
    if (y.rows() != costs.m1() || y.cols() != costs.m2())
        throw UsageError("in_qbar: point shape does not match the cost tables");
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (std::size_t j = 0; j < y.cols(); ++j) {
            if (y(i, j) > upper_barrier(y, costs, i, j) + tol) return false;
            if (y(i, j) < lower_barrier(y, costs, i, j) - tol) return false;
        }
    return true;
}

ObliqueDomain::ObliqueDomain(CostTables costs, std::size_t loop_cap) : costs_(std::move(costs)) {
    if (costs_.m1() * costs_.m2() > loop_cap) return;
    if (auto s = summarize_loop_costs(costs_, loop_cap)) {
        min_loop_cost_ = s->min_abs_cost;
        Loop shown = s->reversed ? Loop(s->tightest.rbegin(), s->tightest.rend()) : s->tightest;
        tightest_loop_ = format_loop(shown);
    }
}

std::size_t ObliqueDomain::sweep_limit(const ModeMatrix& y) const {
    if (!min_loop_cost_) return kUncappedSweepLimit;
    if (!(*min_loop_cost_ > 0.0)) return kSweepMargin;
    const double range = y.size() ? y.max_value() - y.min_value() : 0.0;
    const double rounds = std::ceil(range / *min_loop_cost_);
    if (!std::isfinite(rounds) || rounds > 1e9) return kUncappedSweepLimit;
    return y.size() * static_cast<std::size_t>(rounds) + kSweepMargin;
}

Projection ObliqueDomain::project(const ModeMatrix& anchor, const ProjectionOptions& opts) const {
    if (anchor.rows() != costs_.m1() || anchor.cols() != costs_.m2())
        throw UsageError("project_oblique: point shape does not match the cost tables");
    if (!anchor.all_finite()) throw DataError("project_oblique: non-finite input");

    Projection out{anchor, ModeMatrix(anchor.rows(), anchor.cols()),
                   ModeMatrix(anchor.rows(), anchor.cols()), 0};
    ModeMatrix& y = out.y;
    const std::size_t limit = sweep_limit(anchor);

    for (;;) {
        double moved = 0.0;
        for (std::size_t i = 0; i < y.rows(); ++i)
            for (std::size_t j = 0; j < y.cols(); ++j) {
                const double up = opts.upper ? upper_barrier(y, costs_, i, j) : kInf;
                const double lo = opts.lower ? lower_barrier(y, costs_, i, j) : -kInf;
                const double a = anchor(i, j);
                const double v = opts.order == SweepOrder::min_first ? std::max(std::min(a, up), lo)
                                                                     : std::min(std::max(a, lo), up);
                moved = std::max(moved, std::abs(v - y(i, j)));
                y(i, j) = v;
            }
        ++out.sweeps;
        if (moved <= opts.tol) break;
        if (out.sweeps > limit) {
            std::ostringstream os;
            os << "project_oblique: no fixed point after " << out.sweeps << " sweeps";
            if (!tightest_loop_.empty())
                os << "; tightest loop " << tightest_loop_ << " has |alternating cost| "
                   << *min_loop_cost_;
            throw ConvergenceError(os.str());
        }
    }
    for (std::size_t n = 0; n < y.size(); ++n) {
        const double d = anchor.values()[n] - y.values()[n];
        out.dK.values()[n] = std::max(d, 0.0);
        out.dL.values()[n] = std::max(-d, 0.0);
    }
    return out;
}

Projection project_oblique(const ModeMatrix& y, const CostTables& costs,
                           const ProjectionOptions& opts) {
    return ObliqueDomain(costs).project(y, opts);
}

}  // namespace oblique
