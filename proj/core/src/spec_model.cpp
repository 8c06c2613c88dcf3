#include "oblique/spec_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "oblique/errors.hpp"

namespace oblique {

bool ValidationReport::has(std::string_view clause) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const Violation& v) { return v.clause == clause; });
}

void ValidationReport::merge(const ValidationReport& other) {
    violations.insert(violations.end(), other.violations.begin(), other.violations.end());
}

std::string ValidationReport::summary() const {
    if (ok()) return "ok";
    std::ostringstream os;
    for (std::size_t n = 0; n < violations.size(); ++n) {
        if (n) os << "; ";
        os << violations[n].clause << ": " << violations[n].detail;
    }
    return os.str();
}

namespace {

void check_table(const ModeMatrix& t, char name, ValidationReport& report) {
    const std::size_t m = t.rows();
    if (t.cols() != m) {
        report.violations.push_back({"shape", std::string(1, name) + " table is not square"});
        return;
    }
    auto at = [&](std::size_t a, std::size_t b) {
        std::ostringstream os;
        os << name << '(' << a + 1 << ',' << b + 1 << ")=" << t(a, b);
        return os.str();
    };
    for (std::size_t a = 0; a < m; ++a) {
        if (!std::isfinite(t(a, a)) || t(a, a) != 0.0)
            report.violations.push_back({"cost.zero_diagonal", at(a, a) + " must be 0"});
        for (std::size_t b = 0; b < m; ++b) {
            if (a == b) continue;
            if (!std::isfinite(t(a, b)) || !(t(a, b) > 0.0))
                report.violations.push_back({"cost.positivity", at(a, b) + " must be > 0"});
        }
    }
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
            if (b == a) continue;
            for (std::size_t c = 0; c < m; ++c) {
                if (c == b) continue;
                if (!(t(a, b) + t(b, c) > t(a, c))) {
                    std::ostringstream os;
                    os << name << '(' << a + 1 << ',' << b + 1 << ")+" << name << '(' << b + 1
                       << ',' << c + 1 << ")=" << t(a, b) + t(b, c) << " is not > " << name
                       << '(' << a + 1 << ',' << c + 1 << ")=" << t(a, c);
                    report.violations.push_back({"cost.strict_triangle", os.str()});
                }
            }
        }
}

}  // namespace

ValidationReport validate_cost_matrices(const CostTables& costs) {
    ValidationReport report;
    check_table(costs.k, 'k', report);
    check_table(costs.l, 'l', report);
    return report;
}

// ---------------------------------------------------------------------------

Loop canonical_loop(const Loop& loop) {
    Loop best;
    Loop reversed(loop.rbegin(), loop.rend());
    for (const Loop* orientation : {&loop, static_cast<const Loop*>(&reversed)}) {
        for (std::size_t r = 0; r < orientation->size(); ++r) {
            Loop rotated;
            rotated.reserve(orientation->size());
            for (std::size_t k = 0; k < orientation->size(); ++k)
                rotated.push_back((*orientation)[(r + k) % orientation->size()]);
            if (best.empty() || rotated < best) best = std::move(rotated);
        }
    }
    return best;
}

std::vector<Loop> enumerate_primary_loops(std::size_t m1, std::size_t m2, std::size_t cap) {
    if (m1 * m2 > cap)
        throw CapExceededError("primary-loop enumeration: " + std::to_string(m1) + "x" +
                               std::to_string(m2) + " mode grid exceeds the cap of " +
                               std::to_string(cap) + " mode pairs");
    const std::size_t n = m1 * m2;
    auto pair_of = [m2](std::size_t v) { return ModePair{v / m2, v % m2}; };
    auto adjacent = [&](std::size_t u, std::size_t v) {
        const ModePair a = pair_of(u), b = pair_of(v);
        return u != v && (a.i == b.i || a.j == b.j);
    };

    std::set<Loop> found;
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v)
            if (adjacent(u, v)) found.insert(canonical_loop({pair_of(u), pair_of(v)}));

    // Simple cycles of length >= 3 whose smallest vertex is `start`.
    std::vector<std::size_t> path;
    std::vector<char> on_path(n, 0);
    auto dfs = [&](auto&& self, std::size_t start, std::size_t cur) -> void {
        for (std::size_t next = start; next < n; ++next) {
            if (!adjacent(cur, next)) continue;
            if (next == start) {
                if (path.size() >= 3) {
                    Loop loop;
                    for (std::size_t v : path) loop.push_back(pair_of(v));
                    found.insert(canonical_loop(loop));
                }
                continue;
            }
            if (on_path[next]) continue;
            on_path[next] = 1;
            path.push_back(next);
            self(self, start, next);
            path.pop_back();
            on_path[next] = 0;
        }
    };
    for (std::size_t start = 0; start < n; ++start) {
        path.assign(1, start);
        on_path[start] = 1;
        dfs(dfs, start, start);
        on_path[start] = 0;
    }
    return {found.begin(), found.end()};
}

double alternating_cost(const Loop& loop, const CostTables& costs, bool reversed) {
    double total = 0.0;
    const std::size_t n = loop.size();
    for (std::size_t p = 0; p < n; ++p) {
        ModePair from = loop[p];
        ModePair to = loop[(p + 1) % n];
        if (reversed) std::swap(from, to);
        total += costs.k(from.i, to.i) - costs.l(from.j, to.j);
    }
    return total;
}

std::string format_loop(const Loop& loop) {
    std::ostringstream os;
    for (const ModePair& p : loop) os << '(' << p.i + 1 << ',' << p.j + 1 << ")->";
    if (!loop.empty()) os << '(' << loop.front().i + 1 << ',' << loop.front().j + 1 << ')';
    return os.str();
}

ValidationReport check_loop_costs(const CostTables& costs, double zero_tol, std::size_t cap) {
    ValidationReport report;
    for (const Loop& loop : enumerate_primary_loops(costs.m1(), costs.m2(), cap)) {
        const double fwd = alternating_cost(loop, costs), rev = alternating_cost(loop, costs, true);
        const bool zf = std::abs(fwd) <= zero_tol, zr = std::abs(rev) <= zero_tol;
        if (!zf && !zr) continue;
        std::ostringstream os;
        const Loop shown = zf ? loop : Loop(loop.rbegin(), loop.rend());
        os << "loop " << format_loop(shown) << " has alternating cost " << (zf ? fwd : rev);
        if (zf && zr) os << " (in both orientations)";
        report.violations.push_back({"loop.zero_cost", os.str()});
    }
    return report;
}

std::optional<LoopCostSummary> summarize_loop_costs(const CostTables& costs, std::size_t cap) {
    std::optional<LoopCostSummary> best;
    for (const Loop& loop : enumerate_primary_loops(costs.m1(), costs.m2(), cap))
        for (bool reversed : {false, true}) {
            const double c = std::abs(alternating_cost(loop, costs, reversed));
            if (!best || c < best->min_abs_cost) best = LoopCostSummary{c, loop, reversed};
        }
    return best;
}

// ---------------------------------------------------------------------------

GeneratorSpec GeneratorSpec::zero(std::size_t m1, std::size_t m2) {
    GeneratorSpec g;
    g.family_ = GeneratorFamily::zero;
    g.c_ = ModeMatrix(m1, m2, 0.0);
    return g;
}

GeneratorSpec GeneratorSpec::mode_constant(ModeMatrix c) {
    GeneratorSpec g;
    g.family_ = GeneratorFamily::mode_constant;
    g.c_ = std::move(c);
    return g;
}

GeneratorSpec GeneratorSpec::saturated_affine(double a, std::vector<double> b, double saturation,
                                              ModeMatrix c) {
    if (!(saturation > 0.0) || !std::isfinite(saturation))
        throw UsageError("saturated_affine: saturation level must be positive and finite");
    GeneratorSpec g;
    g.family_ = GeneratorFamily::saturated_affine;
    g.a_ = a;
    g.b_ = std::move(b);
    g.saturation_ = saturation;
    g.c_ = std::move(c);
    return g;
}

double GeneratorSpec::operator()(double, double y, std::span<const double> z, std::size_t i,
                                 std::size_t j) const noexcept {
    switch (family_) {
        case GeneratorFamily::zero:
            return 0.0;
        case GeneratorFamily::mode_constant:
            return c_(i, j);
        case GeneratorFamily::saturated_affine: {
            auto sat = [m = saturation_](double x) { return std::clamp(x, -m, m); };
            double v = a_ * sat(y) + c_(i, j);
            const std::size_t n = std::min(z.size(), b_.size());
            for (std::size_t p = 0; p < n; ++p) v += b_[p] * sat(z[p]);
            return v;
        }
    }
    return 0.0;
}

double GeneratorSpec::lipschitz() const noexcept {
    if (family_ != GeneratorFamily::saturated_affine) return 0.0;
    double b2 = 0.0;
    for (double b : b_) b2 += b * b;
    return std::max(std::abs(a_), std::sqrt(b2));
}

double GeneratorSpec::sup_bound() const noexcept {
    const double cmax = c_.size() ? c_.max_abs() : 0.0;
    switch (family_) {
        case GeneratorFamily::zero:
            return 0.0;
        case GeneratorFamily::mode_constant:
            return cmax;
        case GeneratorFamily::saturated_affine: {
            double s = std::abs(a_);
            for (double b : b_) s += std::abs(b);
            return s * saturation_ + cmax;
        }
    }
    return 0.0;
}

bool GeneratorSpec::state_independent() const noexcept {
    if (family_ != GeneratorFamily::saturated_affine) return true;
    return a_ == 0.0 && std::all_of(b_.begin(), b_.end(), [](double b) { return b == 0.0; });
}

std::string_view GeneratorSpec::family_name() const noexcept {
    switch (family_) {
        case GeneratorFamily::zero: return "zero";
        case GeneratorFamily::mode_constant: return "mode_constant";
        case GeneratorFamily::saturated_affine: return "saturated_affine";
    }
    return "?";
}

// ---------------------------------------------------------------------------

TerminalSpec TerminalSpec::constant(ModeMatrix alpha) {
    TerminalSpec t;
    t.family_ = TerminalFamily::constant;
    t.alpha_ = std::move(alpha);
    return t;
}

TerminalSpec TerminalSpec::affine(ModeMatrix alpha, ModeMatrix beta) {
    if (!alpha.same_shape(beta)) throw UsageError("affine terminal: alpha/beta shape mismatch");
    TerminalSpec t;
    t.family_ = TerminalFamily::affine;
    t.alpha_ = std::move(alpha);
    t.beta_ = std::move(beta);
    return t;
}

TerminalSpec TerminalSpec::leaf_table(std::vector<ModeMatrix> leaves) {
    if (leaves.empty()) throw UsageError("leaf_table terminal: no leaves");
    for (const auto& m : leaves)
        if (!m.same_shape(leaves.front())) throw UsageError("leaf_table terminal: ragged leaves");
    TerminalSpec t;
    t.family_ = TerminalFamily::leaf_table;
    t.alpha_ = ModeMatrix(leaves.front().rows(), leaves.front().cols());
    t.leaves_ = std::move(leaves);
    return t;
}

std::string_view TerminalSpec::family_name() const noexcept {
    switch (family_) {
        case TerminalFamily::constant: return "constant";
        case TerminalFamily::affine: return "affine";
        case TerminalFamily::leaf_table: return "leaf_table";
    }
    return "?";
}

ModeMatrix TerminalSpec::evaluate(std::span<const double> w_state,
                                  std::optional<std::size_t> leaf_index) const {
    switch (family_) {
        case TerminalFamily::constant:
            return alpha_;
        case TerminalFamily::affine: {
            if (w_state.empty()) throw UsageError("affine terminal needs a W-state");
            ModeMatrix out = alpha_;
            for (std::size_t k = 0; k < out.size(); ++k)
                out.values()[k] += beta_.values()[k] * w_state[0];
            return out;
        }
        case TerminalFamily::leaf_table:
            if (!leaf_index || *leaf_index >= leaves_.size())
                throw UsageError("leaf_table terminal: leaf index missing or out of range");
            return leaves_[*leaf_index];
    }
    return alpha_;
}

TerminalSpec TerminalSpec::shifted(double gamma) const {
    TerminalSpec t = *this;
    t.alpha_ += gamma;
    for (auto& m : t.leaves_) m += gamma;
    return t;
}

// ---------------------------------------------------------------------------

ValidationReport validate_game_spec(const GameSpec& spec, double loop_zero_tol,
                                    std::size_t loop_cap) {
    ValidationReport report;
    if (!(spec.horizon > 0.0) || !std::isfinite(spec.horizon))
        report.violations.push_back({"horizon", "horizon must be positive"});
    if (spec.dimension == 0)
        report.violations.push_back({"dimension", "Brownian dimension must be >= 1"});
    if (spec.m1() == 0 || spec.m2() == 0)
        report.violations.push_back({"modes", "mode counts must be >= 1"});

    const ModeMatrix& c = spec.generator.offsets();
    if (c.rows() != spec.m1() || c.cols() != spec.m2())
        report.violations.push_back({"generator.shape", "generator offsets must be m1 x m2"});
    if (spec.generator.family() == GeneratorFamily::saturated_affine &&
        spec.generator.z_coefficients().size() != spec.dimension)
        report.violations.push_back({"generator.shape", "z coefficients must have one entry per "
                                                        "Brownian component"});
    if (spec.terminal.rows() != spec.m1() || spec.terminal.cols() != spec.m2())
        report.violations.push_back({"terminal.shape", "terminal matrices must be m1 x m2"});

    ValidationReport cost_report = validate_cost_matrices(spec.costs);
    report.merge(cost_report);
    if (cost_report.ok()) report.merge(check_loop_costs(spec.costs, loop_zero_tol, loop_cap));
    return report;
}

}  // namespace oblique
