#include "oblique/runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#if __has_include(<nlohmann/json.hpp>)
#include <nlohmann/json.hpp>
#else
#include "json.hpp"
#endif

#include "oblique/bsde_core.hpp"
#include "oblique/format.hpp"
#include "oblique/game.hpp"
#include "oblique/oblique_rbsde.hpp"
#include "oblique/parallel.hpp"
#include "oblique/penalize.hpp"

namespace oblique {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view status_name(TaskStatus s) noexcept {
    switch (s) {
    case TaskStatus::ok: return "ok";
    case TaskStatus::failed: return "failed";
    case TaskStatus::error: return "error";
    case TaskStatus::skipped: return "skipped";
    }
    return "?";
}

std::vector<TaskSpec> select_tasks(const Scenario& s, const std::vector<std::string>& names) {
    std::vector<TaskSpec> out;
    std::vector<std::string> unknown;
    for (const std::string& name : names) {
        auto kind = parse_task_name(name);
        if (!kind) {
            unknown.push_back(name);
            continue;
        }
        TaskSpec t;
        t.kind = *kind;
        for (const TaskSpec& p : s.tasks)
            if (p.kind == *kind) {
                t = p;
                break;
            }
        out.push_back(std::move(t));
    }
    if (!unknown.empty()) {
        std::string msg = "unknown task name(s):";
        for (const auto& u : unknown) msg += " '" + u + "'";
        throw ConfigError(msg + " (expected validate, solve_direct, penalize, double_penalize, saddle, "
                                "brute_force, export)");
    }
    if (out.empty()) throw ConfigError("empty task list");
    return out;
}

namespace {

PathTree build_tree(const Scenario& s) {
    return s.tree.recombining
               ? PathTree::build_recombining(s.tree.steps, s.tree.dimension, s.spec.horizon, s.tree.node_cap)
               : PathTree::build(s.tree.steps, s.tree.dimension, s.spec.horizon, s.tree.node_cap);
}

RbsdeOptions rbsde_options(const Tolerances& tol) {
    RbsdeOptions o;
    o.step.picard_tol = tol.picard;
    o.projection.tol = tol.projection;
    return o;
}

std::string pair_label(std::size_t i, std::size_t j) { return std::to_string(i + 1) + "," + std::to_string(j + 1); }

}  // namespace

void check_preconditions(const Scenario& s, const std::vector<TaskSpec>& tasks) {
    std::vector<std::string> problems;
    std::optional<PathTree> tree;
    if (s.tree.recombining && !s.spec.terminal.markovian())
        problems.push_back("/tree/recombining: a leaf_table terminal needs the non-recombining tree");
    try {
        tree = build_tree(s);
    } catch (const Error& e) {
        problems.push_back(std::string("/tree: ") + e.what());
    }
    if (tree && s.spec.terminal.family() == TerminalFamily::leaf_table && !s.tree.recombining &&
        s.spec.terminal.leaves().size() != tree->level_size(tree->steps()))
        problems.push_back("/terminal/leaves: " + std::to_string(s.spec.terminal.leaves().size()) +
                           " leaf matrices for a tree with " + std::to_string(tree->level_size(tree->steps())) +
                           " leaves");
    if (tree && problems.empty()) {
        try {
            check_contraction(*tree, Driver::raw(s.spec));
        } catch (const Error& e) {
            problems.push_back(std::string("/tree/steps: ") + e.what());
        }
        try {
            check_terminal_in_domain(*tree, s.spec, 1e-12);
        } catch (const Error& e) {
            problems.push_back(std::string("/terminal: ") + e.what());
        }
        for (const TaskSpec& t : tasks) {
            const bool enumerates = t.kind == TaskKind::brute_force || (t.kind == TaskKind::saddle && t.exhaustive);
            if (!enumerates) continue;
            for (Player p : {Player::one, Player::two}) {
                if (t.kind == TaskKind::brute_force && p == Player::two) continue;
                const std::size_t n = strategy_count(p, *tree, s.spec.m1(), s.spec.m2());
                if (n > t.strategy_cap)
                    problems.push_back(std::string(task_name(t.kind)) + ": " +
                                       (p == Player::one ? "Player-I" : "Player-II") + " feedback tables (" +
                                       (n == SIZE_MAX ? std::string("> 2^64") : std::to_string(n)) +
                                       ") exceed strategy_cap " + std::to_string(t.strategy_cap));
            }
        }
    }
    if (!problems.empty()) {
        std::string msg = s.origin + ": task preconditions failed";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ConfigError(msg);
    }
}

namespace {

class Session {
public:
    Session(const Scenario& s, Tolerances tol, std::uint64_t seed, fs::path dir, std::ostream* log)
        : s_(s), tol_(tol), seed_(seed), dir_(std::move(dir)), log_(log), tree_(build_tree(s)) {}

    const PathTree& tree() const { return tree_; }

    TaskOutcome run(const TaskSpec& t) {
        TaskOutcome o;
        o.name = std::string(task_name(t.kind));
        o.seed = fork_seed(seed_, o.name);
        const auto start = std::chrono::steady_clock::now();
        const bool needs_direct = t.kind != TaskKind::validate && t.kind != TaskKind::double_penalize;
        if (needs_direct && !direct_error_.empty() && t.kind != TaskKind::solve_direct) {
            o.status = TaskStatus::skipped;
            o.message = "depends on solve_direct, which failed: " + direct_error_;
        } else {
            try {
                dispatch(t, o);
            } catch (const ConvergenceError& e) {
                o.status = TaskStatus::error;
                o.message = e.what();
            } catch (const Error& e) {
                o.status = TaskStatus::error;
                o.message = e.what();
                config_error_ = true;
            }
            if (t.kind == TaskKind::solve_direct && o.status == TaskStatus::error) direct_error_ = o.message;
        }
        o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (log_) {
            *log_ << "[" << o.name << "] " << status_name(o.status) << " (" << std::fixed << std::setprecision(3)
                  << o.seconds << " s)";
            log_->unsetf(std::ios::floatfield);
            if (!o.message.empty()) *log_ << ": " << o.message;
            *log_ << '\n';
            for (const auto& f : o.findings) *log_ << "  finding: " << f << '\n';
        }
        return o;
    }

    bool config_error() const { return config_error_; }

private:
    const RbsdeSolution& direct() {
        if (!direct_) {
            try {
                direct_ = std::make_unique<RbsdeSolution>(solve_rbsde(s_.spec, tree_, rbsde_options(tol_)));
            } catch (const Error& e) {
                direct_error_ = e.what();
                throw;
            }
        }
        return *direct_;
    }

    std::ofstream open(TaskOutcome& o, const std::string& file) {
        std::ofstream out(dir_ / file, std::ios::binary);
        if (!out) throw ConfigError("cannot write " + (dir_ / file).string());
        o.files.push_back(file);
        return out;
    }

    void fail(TaskOutcome& o, std::string msg) {
        o.status = TaskStatus::failed;
        if (!o.message.empty()) o.message += "; ";
        o.message += msg;
    }

    void dispatch(const TaskSpec& t, TaskOutcome& o) {
        switch (t.kind) {
        case TaskKind::validate: return validate(o);
        case TaskKind::solve_direct: return solve_direct(o);
        case TaskKind::penalize: return penalize(t, o);
        case TaskKind::double_penalize: return double_penalize(t, o);
        case TaskKind::saddle: return saddle(t, o);
        case TaskKind::brute_force: return brute_force(t, o);
        case TaskKind::export_solution: return export_solution(o);
        }
    }

    void validate(TaskOutcome& o) {
        const ValidationReport rep = validate_game_spec(s_.spec);
        auto out = open(o, "validation.csv");
        out << "clause,detail\n";
        for (const Violation& v : rep.violations) out << v.clause << ",\"" << v.detail << "\"\n";
        auto loops = open(o, "loops.csv");
        loops << "loop,cost,reverse_cost\n";
        const auto all = enumerate_primary_loops(s_.spec.m1(), s_.spec.m2());
        for (const Loop& l : all)
            loops << format_loop(l) << ',' << fmt_num(alternating_cost(l, s_.spec.costs)) << ','
                  << fmt_num(alternating_cost(l, s_.spec.costs, true)) << '\n';
        o.metrics.emplace_back("primary_loops", static_cast<double>(all.size()));
        if (auto sum = summarize_loop_costs(s_.spec.costs)) o.metrics.emplace_back("min_loop_cost", sum->min_abs_cost);
        if (!rep.ok()) fail(o, rep.summary());
    }

    void solve_direct(TaskOutcome& o) {
        const RbsdeSolution& sol = direct();
        RbsdeOptions other = rbsde_options(tol_);
        other.projection.order = SweepOrder::max_first;
        const RbsdeSolution alt = solve_rbsde(s_.spec, tree_, other);
        auto out = open(o, "direct.csv");
        out << "i,j,Y,Y_max_first,order_gap\n";
        const std::size_t m1 = s_.spec.m1(), m2 = s_.spec.m2();
        for (std::size_t i = 0; i < m1; ++i)
            for (std::size_t j = 0; j < m2; ++j)
                out << pair_label(i, j) << ',' << fmt_num(sol.Y(0, i, j)) << ',' << fmt_num(alt.Y(0, i, j)) << ','
                    << fmt_num(std::abs(sol.Y(0, i, j) - alt.Y(0, i, j))) << '\n';
        const double order_gap = max_abs_diff(sol.Y, alt.Y);
        o.metrics = {{"nodes", static_cast<double>(tree_.node_count())},
                     {"dt", tree_.dt()},
                     {"max_sweeps", static_cast<double>(sol.max_sweeps)},
                     {"max_iterations", static_cast<double>(sol.max_iterations)},
                     {"order_gap", order_gap}};
        if (order_gap > 1e-9)
            o.findings.push_back("min-first and max-first projection orders differ by " + fmt_num(order_gap));
        const ValidationReport rep = check_minimality(tree_, sol, s_.spec.costs, tol_.invariant);
        if (!rep.ok()) fail(o, rep.summary());
    }

    void penalize(const TaskSpec& t, TaskOutcome& o) {
        ConvergenceReport rep = penalization_report(s_.spec, tree_, t.n_list, rbsde_options(tol_).step, &direct());
        auto out = open(o, "penalization.csv");
        write_convergence_csv(out, rep);
        if (!rep.rows.empty()) {
            o.metrics.emplace_back("final_gap", rep.rows.back().gap);
            if (rep.rows.back().gap_ratio) o.metrics.emplace_back("final_gap_ratio", *rep.rows.back().gap_ratio);
        }
        if (!rep.all_nonincreasing())
            o.findings.push_back("Y^n is not nonincreasing in n; the observed direction is nondecreasing");
        if (!rep.gaps_strictly_decreasing()) o.findings.push_back("gap to the direct solution is not strictly decreasing");
        if (!rep.all_nondecreasing()) fail(o, "Y^n is not monotone in n");
        if (!rep.all_penalty_ok()) fail(o, "penalty term exceeds its bound");
        if (!rep.all_bounds_ok()) fail(o, "Y^n leaves the a-priori bounds");
    }

    void double_penalize(const TaskSpec& t, TaskOutcome& o) {
        const DoublePenaltyReport rep = double_penalty_report(s_.spec, tree_, t.n, t.m_list, rbsde_options(tol_).step);
        auto out = open(o, "double_penalization.csv");
        write_double_penalty_csv(out, rep);
        for (std::size_t k = 1; k < rep.rows.size(); ++k)
            for (std::size_t q = 0; q < rep.rows[k].root.size(); ++q)
                if (rep.rows[k].root.values()[q] > rep.rows[k - 1].root.values()[q] + tol_.monotone) {
                    fail(o, "Y^{n,m}(root) increases between m=" + fmt_num(rep.rows[k - 1].m) +
                                " and m=" + fmt_num(rep.rows[k].m));
                    return;
                }
        if (!rep.rows.empty()) o.metrics.emplace_back("final_gap", rep.rows.back().gap);
    }

    void saddle(const TaskSpec& t, TaskOutcome& o) {
        ModeField Y = direct().Y;
        if (t.corrupt_root != 0.0) {
            for (double& v : Y.at(0)) v += t.corrupt_root;
            o.findings.push_back("fault injection: Y(root) shifted by " + fmt_num(t.corrupt_root));
        }
        SaddleOptions so;
        so.tol = tol_.invariant;
        so.trigger_tol = tol_.trigger;
        so.catalog_size = t.catalog_size;
        so.seed = o.seed;
        so.switch_prob = t.switch_prob;
        so.tie = t.literal_tie ? TieRule::literal : TieRule::priority;
        so.step = rbsde_options(tol_).step;
        const SaddleReport rep = verify_saddle(s_.spec, tree_, Y, so);
        {
            auto out = open(o, "saddle.csv");
            write_saddle_csv(out, rep);
        }
        o.metrics = {{"value_error", rep.max_value_error()},
                     {"catalog_rows", static_cast<double>(rep.rows.size())},
                     {"violations", static_cast<double>(rep.violations.size())}};
        if (!rep.ok()) {
            auto out = open(o, "saddle_violations.txt");
            for (const SaddleViolation& v : rep.violations) out << "# " << v.description << '\n' << v.strategy_dump;
            fail(o, std::to_string(rep.violations.size()) + " saddle violation(s), first: " +
                        rep.violations.front().description);
        }
        if (t.exhaustive) {
            const ExhaustiveSaddle e =
                exhaustive_saddle(s_.spec, tree_, Y, tol_.trigger, t.strategy_cap, so.step, so.tie);
            auto out = open(o, "saddle_exhaustive.csv");
            out << "i,j,Y,max_over_b,min_over_a\n";
            for (std::size_t i = 0; i < s_.spec.m1(); ++i)
                for (std::size_t j = 0; j < s_.spec.m2(); ++j)
                    out << pair_label(i, j) << ',' << fmt_num(e.Y_root(i, j)) << ',' << fmt_num(e.max_over_b(i, j))
                        << ',' << fmt_num(e.min_over_a(i, j)) << '\n';
            const double err = std::max(max_abs_diff(e.max_over_b, e.Y_root), max_abs_diff(e.min_over_a, e.Y_root));
            o.metrics.emplace_back("exhaustive_error", err);
            if (!(err <= tol_.representation)) fail(o, "exhaustive saddle values differ from Y(root) by " + fmt_num(err));
        }
    }

    void brute_force(const TaskSpec& t, TaskOutcome& o) {
        const ModeMatrix bf = brute_force_values(s_.spec, tree_, t.strategy_cap, rbsde_options(tol_).step);
        const ModeMatrix y = direct().Y.matrix(0);
        auto out = open(o, "brute_force.csv");
        out << "i,j,Y,brute_force,abs_diff\n";
        for (std::size_t i = 0; i < y.rows(); ++i)
            for (std::size_t j = 0; j < y.cols(); ++j)
                out << pair_label(i, j) << ',' << fmt_num(y(i, j)) << ',' << fmt_num(bf(i, j)) << ','
                    << fmt_num(std::abs(y(i, j) - bf(i, j))) << '\n';
        const double err = max_abs_diff(bf, y);
        o.metrics.emplace_back("max_abs_diff", err);
        if (!(err <= tol_.representation)) fail(o, "brute force differs from Y(root) by " + fmt_num(err));
    }

    void export_solution(TaskOutcome& o) {
        auto out = open(o, "solution.csv");
        write_solution_csv(out, tree_, direct());
    }

    const Scenario& s_;
    Tolerances tol_;
    std::uint64_t seed_;
    fs::path dir_;
    std::ostream* log_;
    PathTree tree_;
    std::unique_ptr<RbsdeSolution> direct_;
    std::string direct_error_;
    bool config_error_ = false;
};

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

}  // namespace

RunResult run(const Scenario& s, const RunOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<TaskSpec> tasks = opts.tasks ? select_tasks(s, *opts.tasks) : s.tasks;
    Tolerances tol = s.tol;
    if (opts.tolerance) {
        if (!(*opts.tolerance >= 0)) throw ConfigError("--tolerance must be non-negative");
        tol.invariant = tol.representation = *opts.tolerance;
    }
    check_preconditions(s, tasks);
    const std::uint64_t seed = opts.seed.value_or(s.seed);

    RunResult result;
    result.out_dir = !opts.out_dir.empty() ? opts.out_dir
                     : !s.output.empty()   ? fs::path(s.output)
                                           : fs::path("out") / (s.name.empty() ? "scenario" : s.name);
    std::error_code ec;
    fs::create_directories(result.out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + result.out_dir.string() + ": " + ec.message());

    Session session(s, tol, seed, result.out_dir, opts.log);
    for (const TaskSpec& t : tasks) {
        result.tasks.push_back(session.run(t));
        const TaskStatus st = result.tasks.back().status;
        if (st == TaskStatus::failed || st == TaskStatus::skipped)
            result.exit_code = std::max(result.exit_code, kExitInvariant);
        if (st == TaskStatus::error)
            result.exit_code = std::max(result.exit_code, session.config_error() ? kExitConfig : kExitInvariant);
    }

    json m;
    m["manifest_version"] = kManifestVersion;
    m["scenario"] = {{"name", s.name},
                     {"origin", s.origin},
                     {"schema_version", kScenarioSchemaVersion},
                     {"spec_hash", "fnv1a64:" + hex64(fnv1a(s.canonical))}};
    m["seed"] = seed;
    m["tolerances"] = {{"projection", tol.projection}, {"picard", tol.picard},
                       {"trigger", tol.trigger},       {"invariant", tol.invariant},
                       {"representation", tol.representation}, {"monotone", tol.monotone}};
    m["tree"] = {{"steps", s.tree.steps},
                 {"dimension", s.tree.dimension},
                 {"recombining", s.tree.recombining},
                 {"nodes", session.tree().node_count()},
                 {"dt", session.tree().dt()}};
    m["workers"] = worker_count();
    json list = json::array();
    for (const TaskOutcome& o : result.tasks) {
        json t = {{"name", o.name},       {"status", status_name(o.status)}, {"seconds", o.seconds},
                  {"seed", o.seed},       {"files", o.files},                {"findings", o.findings},
                  {"message", o.message}};
        json metrics = json::object();
        for (const auto& [k, v] : o.metrics) metrics[k] = std::isfinite(v) ? json(v) : json(fmt_num(v));
        t["metrics"] = metrics;
        list.push_back(std::move(t));
    }
    m["tasks"] = std::move(list);
    m["exit_code"] = result.exit_code;
    m["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ofstream mf(result.out_dir / "manifest.json", std::ios::binary);
    mf << m.dump(2) << '\n';
    if (!mf) throw ConfigError("cannot write " + (result.out_dir / "manifest.json").string());
    return result;
}

}  // namespace oblique
