// One line per acceptance criterion: "criterion N PASS|FAIL  <title>: <evidence>".
// Tolerances and sizes are pinned here. Criteria listed in kKnownUnattainable
// are printed as FAIL when they fail and do not change the exit status; any
// other FAIL makes the process exit 1.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "oblique/bsde_core.hpp"
#include "oblique/format.hpp"
#include "oblique/game.hpp"
#include "oblique/oblique_rbsde.hpp"
#include "oblique/penalize.hpp"
#include "oblique/runner.hpp"
#include "oracles.hpp"

using namespace oblique;
namespace fs = std::filesystem;

namespace {

// Criterion 2 asks for Y^n nonincreasing in n. The penalty n*sum(.)^- is
// nonnegative and grows with n, so by comparison Y^n is nondecreasing; the
// stated direction fails wherever a lower barrier is active.
const std::set<int> kKnownUnattainable = {2};

const std::string kScenarios = OBLIQUE_SCENARIO_DIR;

struct Verdict {
    bool pass = false;
    std::string evidence;
};

int unexpected = 0;

void report(int id, const std::string& title, const std::function<Verdict()>& check) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = check();
    } catch (const std::exception& e) {
        v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool known = kKnownUnattainable.count(id) > 0;
    std::ostringstream time;
    time.precision(3);
    time << std::fixed << secs;
    std::printf("criterion %2d %s  %s: %s [%s s]%s\n", id, v.pass ? "PASS" : "FAIL", title.c_str(),
                v.evidence.c_str(), time.str().c_str(),
                !v.pass && known ? " (known unattainable, see README)" : "");
    std::fflush(stdout);
    if (!v.pass && !known) ++unexpected;
}

std::string num(double x) { return fmt_num(x); }

GameSpec standard() { return parse_scenario(kScenarios + "/standard_2x2.json").spec; }

ConvergenceReport standard_sweep(std::vector<double> n_list) {
    const GameSpec g = standard();
    const PathTree t = PathTree::build(8, 1, g.horizon);
    const RbsdeSolution direct = solve_rbsde(g, t);
    return penalization_report(g, t, std::move(n_list), {}, &direct);
}

/// Two-step scenarios shipped with the repository.
std::vector<Scenario> two_step_scenarios(bool only_2x2) {
    std::vector<Scenario> out;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(kScenarios))
        if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        Scenario s = parse_scenario(f);
        if (s.tree.steps != 2 || s.tree.recombining) continue;
        if (only_2x2 && (s.spec.m1() != 2 || s.spec.m2() != 2)) continue;
        out.push_back(std::move(s));
    }
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path runs = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "oblique_acceptance";

    report(1, "martingale sanity", [] {
        constexpr double tol = 1e-12;
        const ModeMatrix xi{{0.1, 0.2}, {0.3, 0.1}};
        const GameSpec g = {fixture::standard_costs(), GeneratorSpec::zero(2, 2), TerminalSpec::constant(xi), 1.0, 1};
        const auto t0 = std::chrono::steady_clock::now();
        double worst = 0;
        for (std::size_t n = 1; n <= 12; ++n) {
            const PathTree t = PathTree::build(n, 1, 1.0);
            const RbsdeSolution s = solve_rbsde(g, t);
            for (std::size_t node = 0; node < t.node_count(); ++node)
                worst = std::max(worst, max_abs_diff(s.Y.matrix(node), xi));
            worst = std::max({worst, s.K.max_abs(), s.L.max_abs(), s.dK.max_abs(), s.dL.max_abs()});
        }
        const double secs = seconds_since(t0);
        return Verdict{worst <= tol && secs < 1.0,
                       "N=1..12, max(|Y-xi|, |K|, |L|) = " + num(worst) + " (tol 1e-12), " + num(secs) + " s (< 1 s)"};
    });

    report(2, "penalization monotonicity, Y^n nonincreasing in n", [] {
        const ConvergenceReport r = standard_sweep({1, 2, 4, 8, 16});
        double worst = 0;
        for (const auto& row : r.rows) worst = std::max(worst, row.max_increase);
        return Verdict{r.all_nonincreasing(),
                       "standard_2x2 N=8 n=1..16: max increase between successive n = " + num(worst) +
                           " (slack 1e-10); observed direction nondecreasing: " +
                           (r.all_nondecreasing() ? "yes" : "no")};
    });

    report(3, "penalty bound", [] {
        const ConvergenceReport r = standard_sweep({1, 2, 4, 8, 16});
        double worst = 0;
        for (const auto& row : r.rows) worst = std::max(worst, row.penalty_stat);
        return Verdict{r.all_penalty_ok(), "max n*(Y_ij - Y_ij' + l)^- = " + num(worst) + " <= 2|psi| + 1e-9 = " +
                                               num(r.penalty_bound)};
    });

    report(4, "a-priori bounds", [] {
        const ConvergenceReport r = standard_sweep({1, 2, 4, 8, 16});
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& row : r.rows) {
            lo = std::min(lo, row.y_min);
            hi = std::max(hi, row.y_max);
        }
        return Verdict{r.all_bounds_ok(), "Y^n in [" + num(lo) + ", " + num(hi) + "] within [" + num(r.lower_bound) +
                                              ", " + num(r.upper_bound) + "]"};
    });

    report(5, "penalization limit", [] {
        const ConvergenceReport r = standard_sweep({1, 2, 4, 8, 16, 32});
        auto gap = [&](double n) {
            for (const auto& row : r.rows)
                if (row.n == n) return row.gap;
            return std::numeric_limits<double>::quiet_NaN();
        };
        // Geometric extrapolation of the decay from n = 8, 16 to n = 32.
        const double predicted = gap(16) * gap(16) / gap(8);
        bool ratios = true;
        std::string ratio_text;
        for (double n : {4.0, 8.0, 16.0}) {
            const double q = gap(2 * n) / gap(n);
            ratios &= q <= 0.75;
            ratio_text += (ratio_text.empty() ? "" : ", ") + num(q);
        }
        const bool below = gap(32) < 10 * predicted;
        const bool strict = r.gaps_strictly_decreasing();
        return Verdict{below && strict && ratios,
                       "gap(32) = " + num(gap(32)) + " < 10 x extrapolated " + num(predicted) +
                           ": " + (below ? "yes" : "no") + "; strictly decreasing: " + (strict ? "yes" : "no") +
                           "; gap(2n)/gap(n) for n=4,8,16: " + ratio_text + " (<= 0.75)"};
    });

    report(6, "minimality of the pushes", [] {
        constexpr double active = 1e-9, on_barrier = 1e-8;
        std::mt19937_64 rng(606);
        const auto t0 = std::chrono::steady_clock::now();
        std::size_t pushes = 0, bad = 0;
        for (int k = 0; k < 100; ++k) {
            const std::size_t m1 = k % 2 ? 3 : 2, steps = 1 + k % 6;
            const GameSpec g = fixture::random_game(m1, 2, steps, rng);
            const PathTree t = PathTree::build(steps, 1, g.horizon);
            const RbsdeSolution s = solve_rbsde(g, t);
            for (std::size_t node = 0; node < t.node_count(); ++node) {
                const ModeMatrix y = s.Y.matrix(node);
                for (std::size_t i = 0; i < m1; ++i)
                    for (std::size_t j = 0; j < 2; ++j) {
                        if (s.dK(node, i, j) > active) {
                            ++pushes;
                            bad += std::abs(y(i, j) - upper_barrier(y, g.costs, i, j)) > on_barrier;
                        }
                        if (s.dL(node, i, j) > active) {
                            ++pushes;
                            bad += std::abs(y(i, j) - lower_barrier(y, g.costs, i, j)) > on_barrier;
                        }
                    }
            }
        }
        const double secs = seconds_since(t0);
        return Verdict{bad == 0 && pushes > 0 && secs < 60,
                       "100 random 2x2/3x2 games, N<=6: " + std::to_string(pushes) + " active pushes, " +
                           std::to_string(bad) + " off their barrier by > 1e-8, " + num(secs) + " s (< 60 s)"};
    });

    report(7, "representation by exhaustive Player-I enumeration", [] {
        constexpr double tol = 1e-9;
        double worst = 0;
        std::string names;
        for (const Scenario& s : two_step_scenarios(false)) {
            const PathTree t = PathTree::build(2, s.tree.dimension, s.spec.horizon);
            const ModeMatrix bf = brute_force_values(s.spec, t);
            worst = std::max(worst, max_abs_diff(bf, solve_rbsde(s.spec, t).Y.matrix(0)));
            names += (names.empty() ? "" : " ") + s.name;
        }
        return Verdict{!names.empty() && worst <= tol,
                       "N=2 scenarios [" + names + "]: max |brute force - Y(root)| = " + num(worst) + " (tol 1e-9)"};
    });

    report(8, "saddle point on the standard instance", [] {
        constexpr double tol = 1e-8;
        const auto t0 = std::chrono::steady_clock::now();
        const Scenario sc = parse_scenario(kScenarios + "/standard_2x2.json");
        const PathTree t = PathTree::build(8, 1, sc.spec.horizon);
        const RbsdeSolution s = solve_rbsde(sc.spec, t);
        SaddleOptions o;
        o.tol = tol;
        o.catalog_size = 200;
        o.seed = fork_seed(sc.seed, "saddle");
        const SaddleReport r = verify_saddle(sc.spec, t, s.Y, o);
        double min_slack = std::numeric_limits<double>::infinity();
        for (const auto& row : r.rows) min_slack = std::min(min_slack, row.slack);
        const double secs = seconds_since(t0);
        return Verdict{r.ok() && r.max_value_error() <= tol && secs < 30,
                       std::to_string(r.rows.size()) + " catalog rows (200 random + stay, constant, greedy per player, "
                       "4 starts): " + std::to_string(r.violations.size()) + " violations, min slack " +
                           num(min_slack) + ", |U* - Y| = " + num(r.max_value_error()) + ", " + num(secs) + " s (< 30 s)"};
    });

    report(9, "exhaustive saddle check", [] {
        constexpr double tol = 1e-9;
        double worst = 0;
        std::size_t count = 0;
        for (const Scenario& s : two_step_scenarios(true)) {
            const PathTree t = PathTree::build(2, s.tree.dimension, s.spec.horizon);
            const ExhaustiveSaddle e = exhaustive_saddle(s.spec, t, solve_rbsde(s.spec, t).Y);
            worst = std::max({worst, max_abs_diff(e.max_over_b, e.Y_root), max_abs_diff(e.min_over_a, e.Y_root)});
            ++count;
        }
        return Verdict{count > 0 && worst <= tol,
                       std::to_string(count) + " N=2 2x2 scenarios, all 4096 tables per player: max deviation of "
                       "max_b U^{a*,b} and min_a U^{a,b*} from Y(root) = " + num(worst) + " (tol 1e-9)"};
    });

    report(10, "loop-cost validator", [] {
        const CostTables flat{ModeMatrix{{0, 1}, {1, 0}}, ModeMatrix{{0, 1}, {1, 0}}};
        const bool detects = check_loop_costs(flat).has("loop.zero_cost");
        const bool passes = validate_cost_matrices(fixture::standard_costs()).ok() &&
                            check_loop_costs(fixture::standard_costs()).ok();
        bool match = true;
        for (std::size_t m1 = 1; m1 <= 3; ++m1)
            for (std::size_t m2 = 1; m2 <= 3; ++m2) {
                std::set<std::vector<std::size_t>> mine;
                for (const Loop& l : enumerate_primary_loops(m1, m2)) {
                    std::vector<std::size_t> v;
                    for (const ModePair& p : l) v.push_back(p.i * m2 + p.j);
                    mine.insert(oracle::cycle_key(v));
                }
                match &= mine == oracle::closed_walks(m1, m2);
            }
        return Verdict{detects && passes && match, std::string("zero-cost loop in k=l=1 detected: ") +
                                                       (detects ? "yes" : "no") + "; k=1, l=0.8 accepted: " +
                                                       (passes ? "yes" : "no") +
                                                       "; enumeration = closed-walk oracle on all grids up to 3x3: " +
                                                       (match ? "yes" : "no")};
    });

    report(11, "projection order independence", [] {
        constexpr double tol = 1e-9;
        std::mt19937_64 rng(1111);
        std::uniform_real_distribution<double> u(-3, 3);
        double worst = 0;
        for (int k = 0; k < 1000; ++k) {
            const std::size_t m1 = 1 + rng() % 3, m2 = 1 + rng() % 3;
            const CostTables c = fixture::random_costs(m1, m2, rng);
            ModeMatrix y(m1, m2);
            for (double& v : y.values()) v = u(rng);
            const ObliqueDomain dom(c);
            ProjectionOptions lo, hi;
            lo.order = SweepOrder::min_first;
            hi.order = SweepOrder::max_first;
            worst = std::max(worst, max_abs_diff(dom.project(y, lo).y, dom.project(y, hi).y));
        }
        return Verdict{worst <= tol, "1000 random instances up to 3x3: max |min-first - max-first| = " + num(worst) +
                                         " (tol 1e-9)"};
    });

    report(12, "performance", [&runs] {
        RunOptions o;
        o.out_dir = runs / "perf_3x3_n12";
        auto t0 = std::chrono::steady_clock::now();
        const RunResult full = run(parse_scenario(kScenarios + "/perf_3x3_n12.json"), o);
        const double full_secs = seconds_since(t0);

        const Scenario lat = parse_scenario(kScenarios + "/perf_2x2_n20_lattice.json");
        t0 = std::chrono::steady_clock::now();
        const PathTree t = PathTree::build_recombining(20, 1, lat.spec.horizon);
        const RbsdeSolution s = solve_rbsde(lat.spec, t);
        const double lattice_secs = seconds_since(t0);
        return Verdict{full.exit_code == kExitOk && full_secs < 120 && s.Y.all_finite() && lattice_secs < 60,
                       "3x3 N=12 pipeline (direct + n-sweep + 200-strategy catalog) " + num(full_secs) +
                           " s (< 120 s, exit " + std::to_string(full.exit_code) + "); 2x2 N=20 lattice direct solve " +
                           num(lattice_secs) + " s (< 60 s)"};
    });

    std::printf("acceptance: %s\n", unexpected == 0 ? "all criteria pass except the known-unattainable ones"
                                                    : (std::to_string(unexpected) + " unexpected failure(s)").c_str());
    return unexpected == 0 ? 0 : 1;
}
