#include "oblique/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#if __has_include(<nlohmann/json.hpp>)
#include <nlohmann/json.hpp>
#else
#include "json.hpp"
#endif

namespace oblique {

using json = nlohmann::json;

namespace {

constexpr std::string_view kTaskNames[] = {"validate", "solve_direct", "penalize", "double_penalize",
                                           "saddle",   "brute_force",  "export"};

std::string child(const std::string& ptr, std::string_view key) {
    return ptr + "/" + std::string(key);
}

/// Schema reader that records every problem instead of stopping at the first.
class Reader {
public:
    std::vector<SchemaIssue> issues;

    void issue(std::string where, std::string what) { issues.push_back({std::move(where), std::move(what)}); }

    bool object(const json& j, const std::string& ptr) {
        if (j.is_object()) return true;
        issue(ptr.empty() ? "/" : ptr, "expected an object");
        return false;
    }

    void allow(const json& j, const std::string& ptr, std::initializer_list<std::string_view> keys) {
        if (!j.is_object()) return;
        for (const auto& [key, _] : j.items()) {
            bool known = false;
            for (auto k : keys) known |= key == k;
            if (!known) issue(child(ptr, key), "unknown field '" + key + "'");
        }
    }

    const json* field(const json& j, const std::string& ptr, std::string_view key, bool required) {
        if (!j.is_object()) return nullptr;
        auto it = j.find(std::string(key));
        if (it == j.end()) {
            if (required) issue(child(ptr, key), "missing required field");
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const json& j, const std::string& ptr, std::string_view key, bool required) {
        const json* v = field(j, ptr, key, required);
        if (!v) return std::nullopt;
        if (!v->is_number()) {
            issue(child(ptr, key), "expected a number, got " + std::string(v->type_name()));
            return std::nullopt;
        }
        const double x = v->get<double>();
        if (!std::isfinite(x)) {
            issue(child(ptr, key), "must be finite");
            return std::nullopt;
        }
        return x;
    }

    std::optional<double> positive(const json& j, const std::string& ptr, std::string_view key, bool required) {
        auto x = number(j, ptr, key, required);
        if (x && !(*x > 0)) {
            issue(child(ptr, key), "must be positive");
            return std::nullopt;
        }
        return x;
    }

    std::optional<std::uint64_t> count(const json& j, const std::string& ptr, std::string_view key, bool required) {
        const json* v = field(j, ptr, key, required);
        if (!v) return std::nullopt;
        if (!v->is_number_unsigned()) {
            issue(child(ptr, key), "expected a non-negative integer");
            return std::nullopt;
        }
        return v->get<std::uint64_t>();
    }

    std::optional<bool> boolean(const json& j, const std::string& ptr, std::string_view key) {
        const json* v = field(j, ptr, key, false);
        if (!v) return std::nullopt;
        if (!v->is_boolean()) {
            issue(child(ptr, key), "expected true or false");
            return std::nullopt;
        }
        return v->get<bool>();
    }

    std::optional<std::string> string(const json& j, const std::string& ptr, std::string_view key, bool required) {
        const json* v = field(j, ptr, key, required);
        if (!v) return std::nullopt;
        if (!v->is_string()) {
            issue(child(ptr, key), "expected a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    /// Number list; expected == 0 accepts any non-empty length.
    std::optional<std::vector<double>> numbers(const json& v, const std::string& ptr, std::size_t expected) {
        if (!v.is_array()) {
            issue(ptr, "expected an array of numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        bool ok = true;
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (!v[k].is_number() || !std::isfinite(v[k].get<double>())) {
                issue(ptr + "/" + std::to_string(k), "expected a finite number");
                ok = false;
                continue;
            }
            out.push_back(v[k].get<double>());
        }
        if (!ok) return std::nullopt;
        if ((expected && out.size() != expected) || (!expected && out.empty())) {
            issue(ptr, "expected " + (expected ? std::to_string(expected) : std::string("at least 1")) +
                           " entries, got " + std::to_string(out.size()));
            return std::nullopt;
        }
        return out;
    }

    std::optional<std::vector<double>> numbers(const json& j, const std::string& ptr, std::string_view key,
                                               std::size_t expected, bool required) {
        const json* v = field(j, ptr, key, required);
        if (!v) return std::nullopt;
        return numbers(*v, child(ptr, key), expected);
    }

    std::optional<ModeMatrix> matrix(const json& j, const std::string& ptr, std::string_view key,
                                     std::size_t rows, std::size_t cols, bool required) {
        if (rows == 0 || cols == 0) {
            field(j, ptr, key, required);
            return std::nullopt;
        }
        auto v = numbers(j, ptr, key, rows * cols, required);
        if (!v) return std::nullopt;
        return ModeMatrix::from_row_major(rows, cols, *v);
    }
};

std::string clause_location(const std::string& clause) {
    if (clause.rfind("cost.", 0) == 0 || clause.rfind("loop.", 0) == 0) return "/costs";
    if (clause.rfind("generator", 0) == 0) return "/generator";
    if (clause.rfind("terminal", 0) == 0) return "/terminal";
    if (clause == "dimension") return "/tree/dimension";
    if (clause == "modes") return "/modes";
    return "/" + clause;
}

void parse_generator(Reader& r, const json& root, std::size_t m1, std::size_t m2, std::size_t d,
                     GameSpec& spec) {
    const json* g = r.field(root, "", "generator", true);
    if (!g || !r.object(*g, "/generator")) return;
    auto family = r.string(*g, "/generator", "family", true);
    if (!family) return;
    if (*family == "zero") {
        r.allow(*g, "/generator", {"family"});
        if (m1 && m2) spec.generator = GeneratorSpec::zero(m1, m2);
    } else if (*family == "mode_constant") {
        r.allow(*g, "/generator", {"family", "c"});
        if (auto c = r.matrix(*g, "/generator", "c", m1, m2, true)) spec.generator = GeneratorSpec::mode_constant(*c);
    } else if (*family == "saturated_affine") {
        r.allow(*g, "/generator", {"family", "a", "b", "saturation", "c"});
        auto a = r.number(*g, "/generator", "a", true);
        auto b = r.numbers(*g, "/generator", "b", d, true);
        auto sat = r.positive(*g, "/generator", "saturation", true);
        auto c = r.matrix(*g, "/generator", "c", m1, m2, true);
        if (a && b && sat && c) spec.generator = GeneratorSpec::saturated_affine(*a, *b, *sat, *c);
    } else {
        r.issue("/generator/family", "unknown generator family '" + *family +
                                         "' (expected zero, mode_constant or saturated_affine)");
    }
}

void parse_terminal(Reader& r, const json& root, std::size_t m1, std::size_t m2, GameSpec& spec) {
    const json* t = r.field(root, "", "terminal", true);
    if (!t || !r.object(*t, "/terminal")) return;
    auto family = r.string(*t, "/terminal", "family", true);
    if (!family) return;
    if (*family == "constant") {
        r.allow(*t, "/terminal", {"family", "alpha"});
        if (auto a = r.matrix(*t, "/terminal", "alpha", m1, m2, true)) spec.terminal = TerminalSpec::constant(*a);
    } else if (*family == "affine") {
        r.allow(*t, "/terminal", {"family", "alpha", "beta"});
        auto a = r.matrix(*t, "/terminal", "alpha", m1, m2, true);
        auto b = r.matrix(*t, "/terminal", "beta", m1, m2, true);
        if (a && b) spec.terminal = TerminalSpec::affine(*a, *b);
    } else if (*family == "leaf_table") {
        r.allow(*t, "/terminal", {"family", "leaves"});
        const json* leaves = r.field(*t, "/terminal", "leaves", true);
        if (!leaves) return;
        if (!leaves->is_array() || leaves->empty()) {
            r.issue("/terminal/leaves", "expected a non-empty array of row-major matrices");
            return;
        }
        std::vector<ModeMatrix> out;
        for (std::size_t k = 0; k < leaves->size(); ++k) {
            auto v = r.numbers((*leaves)[k], "/terminal/leaves/" + std::to_string(k), m1 * m2);
            if (v && m1 && m2) out.push_back(ModeMatrix::from_row_major(m1, m2, *v));
        }
        if (out.size() == leaves->size() && m1 && m2) spec.terminal = TerminalSpec::leaf_table(std::move(out));
    } else {
        r.issue("/terminal/family", "unknown terminal family '" + *family +
                                        "' (expected constant, affine or leaf_table)");
    }
}

void parse_tolerances(Reader& r, const json& root, Tolerances& tol) {
    const json* t = r.field(root, "", "tolerances", false);
    if (!t || !r.object(*t, "/tolerances")) return;
    r.allow(*t, "/tolerances", {"projection", "picard", "trigger", "invariant", "representation", "monotone"});
    auto set = [&](std::string_view key, double& dst) {
        if (auto v = r.number(*t, "/tolerances", key, false)) {
            if (*v < 0)
                r.issue(child("/tolerances", key), "must be non-negative");
            else
                dst = *v;
        }
    };
    set("projection", tol.projection);
    set("picard", tol.picard);
    set("trigger", tol.trigger);
    set("invariant", tol.invariant);
    set("representation", tol.representation);
    set("monotone", tol.monotone);
}

std::optional<std::vector<double>> positive_list(Reader& r, const json& j, const std::string& ptr,
                                                 std::string_view key) {
    auto v = r.numbers(j, ptr, key, 0, false);
    if (!v) return v;
    for (double x : *v)
        if (!(x > 0)) {
            r.issue(child(ptr, key), "penalty parameters must be positive");
            return std::nullopt;
        }
    return v;
}

void parse_tasks(Reader& r, const json& root, std::vector<TaskSpec>& tasks) {
    const json* list = r.field(root, "", "tasks", false);
    if (!list) {
        tasks.push_back({});
        return;
    }
    if (!list->is_array()) {
        r.issue("/tasks", "expected an array of task names or task objects");
        return;
    }
    for (std::size_t k = 0; k < list->size(); ++k) {
        const std::string ptr = "/tasks/" + std::to_string(k);
        const json& item = (*list)[k];
        std::optional<std::string> name;
        if (item.is_string())
            name = item.get<std::string>();
        else if (item.is_object())
            name = r.string(item, ptr, "task", true);
        else
            r.issue(ptr, "expected a task name or an object with a 'task' field");
        if (!name) continue;
        auto kind = parse_task_name(*name);
        if (!kind) {
            r.issue(item.is_object() ? ptr + "/task" : ptr, "unknown task '" + *name + "'");
            continue;
        }
        TaskSpec t;
        t.kind = *kind;
        if (item.is_object()) {
            switch (*kind) {
            case TaskKind::penalize:
                r.allow(item, ptr, {"task", "n_list"});
                if (auto v = positive_list(r, item, ptr, "n_list")) t.n_list = *v;
                break;
            case TaskKind::double_penalize:
                r.allow(item, ptr, {"task", "n", "m_list"});
                if (auto v = r.positive(item, ptr, "n", false)) t.n = *v;
                if (auto v = positive_list(r, item, ptr, "m_list")) t.m_list = *v;
                break;
            case TaskKind::saddle:
                r.allow(item, ptr, {"task", "catalog_size", "switch_prob", "tie_rule", "exhaustive",
                                    "strategy_cap", "fault_injection"});
                if (auto v = r.count(item, ptr, "catalog_size", false)) t.catalog_size = *v;
                if (auto v = r.number(item, ptr, "switch_prob", false)) {
                    if (*v < 0 || *v > 1)
                        r.issue(ptr + "/switch_prob", "must lie in [0, 1]");
                    else
                        t.switch_prob = *v;
                }
                if (auto v = r.string(item, ptr, "tie_rule", false)) {
                    if (*v == "literal")
                        t.literal_tie = true;
                    else if (*v != "priority")
                        r.issue(ptr + "/tie_rule", "expected 'priority' or 'literal'");
                }
                if (auto v = r.boolean(item, ptr, "exhaustive")) t.exhaustive = *v;
                if (auto v = r.count(item, ptr, "strategy_cap", false)) t.strategy_cap = *v;
                if (const json* f = r.field(item, ptr, "fault_injection", false)) {
                    if (r.object(*f, ptr + "/fault_injection")) {
                        r.allow(*f, ptr + "/fault_injection", {"root_shift"});
                        if (auto v = r.number(*f, ptr + "/fault_injection", "root_shift", true)) t.corrupt_root = *v;
                    }
                }
                break;
            case TaskKind::brute_force:
                r.allow(item, ptr, {"task", "strategy_cap"});
                if (auto v = r.count(item, ptr, "strategy_cap", false)) t.strategy_cap = *v;
                break;
            default:
                r.allow(item, ptr, {"task"});
            }
        }
        tasks.push_back(std::move(t));
    }
    if (tasks.empty()) r.issue("/tasks", "task list is empty");
}

}  // namespace

std::string_view task_name(TaskKind kind) noexcept { return kTaskNames[static_cast<int>(kind)]; }

std::optional<TaskKind> parse_task_name(std::string_view name) noexcept {
    for (int k = 0; k < 7; ++k)
        if (kTaskNames[k] == name) return static_cast<TaskKind>(k);
    return std::nullopt;
}

ScenarioError::ScenarioError(std::string origin, std::vector<SchemaIssue> issues)
    : ConfigError([&] {
          std::ostringstream os;
          os << origin << ": " << issues.size() << " problem" << (issues.size() == 1 ? "" : "s");
          for (const auto& i : issues) os << "\n  " << origin << ":" << i.location << ": " << i.message;
          return os.str();
      }()),
      origin_(std::move(origin)),
      issues_(std::move(issues)) {}

Scenario parse_scenario_text(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        // Byte offset to line:column.
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ScenarioError(origin, {{std::to_string(line) + ":" + std::to_string(col), "malformed JSON"}});
    }

    Reader r;
    Scenario s;
    s.origin = origin;
    if (!r.object(root, "")) throw ScenarioError(origin, r.issues);
    r.allow(root, "", {"schema_version", "name", "modes", "costs", "generator", "terminal", "horizon", "tree",
                       "seed", "tolerances", "tasks", "output"});

    if (auto v = r.count(root, "", "schema_version", true); v && *v != kScenarioSchemaVersion)
        r.issue("/schema_version", "unsupported schema version " + std::to_string(*v) + " (this build reads " +
                                       std::to_string(kScenarioSchemaVersion) + ")");
    s.name = r.string(root, "", "name", true).value_or("");

    std::size_t m1 = 0, m2 = 0;
    if (const json* m = r.field(root, "", "modes", true); m && r.object(*m, "/modes")) {
        r.allow(*m, "/modes", {"m1", "m2"});
        auto a = r.count(*m, "/modes", "m1", true), b = r.count(*m, "/modes", "m2", true);
        if (a && (*a == 0 || *a > 16)) r.issue("/modes/m1", "must lie in 1..16");
        else if (a) m1 = *a;
        if (b && (*b == 0 || *b > 16)) r.issue("/modes/m2", "must lie in 1..16");
        else if (b) m2 = *b;
    }

    if (const json* t = r.field(root, "", "tree", true); t && r.object(*t, "/tree")) {
        r.allow(*t, "/tree", {"steps", "dimension", "node_cap", "recombining"});
        if (auto v = r.count(*t, "/tree", "steps", true)) {
            if (*v == 0) r.issue("/tree/steps", "must be at least 1");
            s.tree.steps = *v;
        }
        if (auto v = r.count(*t, "/tree", "dimension", false)) {
            if (*v == 0) r.issue("/tree/dimension", "must be at least 1");
            s.tree.dimension = *v;
        }
        if (auto v = r.count(*t, "/tree", "node_cap", false)) s.tree.node_cap = *v;
        if (auto v = r.boolean(*t, "/tree", "recombining")) s.tree.recombining = *v;
    }
    const std::size_t d = s.tree.dimension;

    bool costs_ok = false;
    if (const json* c = r.field(root, "", "costs", true); c && r.object(*c, "/costs")) {
        r.allow(*c, "/costs", {"k", "l"});
        auto k = r.matrix(*c, "/costs", "k", m1, m1, true);
        auto l = r.matrix(*c, "/costs", "l", m2, m2, true);
        if (k && l) {
            s.spec.costs = {*k, *l};
            costs_ok = true;
        }
    }
    parse_generator(r, root, m1, m2, d, s.spec);
    parse_terminal(r, root, m1, m2, s.spec);
    if (auto h = r.positive(root, "", "horizon", true)) s.spec.horizon = *h;
    s.spec.dimension = d;
    if (auto v = r.count(root, "", "seed", false)) s.seed = *v;
    parse_tolerances(r, root, s.tol);
    parse_tasks(r, root, s.tasks);
    s.output = r.string(root, "", "output", false).value_or("");

    // Mathematical validation only once the pieces exist.
    if (costs_ok && r.issues.empty()) {
        try {
            const ValidationReport rep = validate_game_spec(s.spec);
            for (const Violation& v : rep.violations)
                r.issue(clause_location(v.clause), "[" + v.clause + "] " + v.detail);
        } catch (const CapExceededError& e) {
            r.issue("/modes", e.what());
        }
    } else if (costs_ok) {
        for (const Violation& v : validate_cost_matrices(s.spec.costs).violations)
            r.issue("/costs", "[" + v.clause + "] " + v.detail);
    }
    if (!r.issues.empty()) throw ScenarioError(origin, std::move(r.issues));
    s.canonical = root.dump();
    return s;
}

Scenario parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError(path.string(), {{"/", "cannot open file"}});
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str(), path.string());
}

std::uint64_t fnv1a(std::string_view bytes) noexcept {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fork_seed(std::uint64_t seed, std::string_view task) noexcept {
    // splitmix64 finalizer over the xor of run seed and task-name hash
    std::uint64_t z = seed ^ fnv1a(task);
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace oblique
