#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "oblique/errors.hpp"
#include "oblique/lattice.hpp"
#include "oblique/spec_model.hpp"

namespace oblique {

inline constexpr int kScenarioSchemaVersion = 1;

struct TreeConfig {
    std::size_t steps = 0;
    std::size_t dimension = 1;
    std::size_t node_cap = kDefaultNodeCap;
    bool recombining = false;
};

/// Solver tolerances and the tolerances at which invariants are asserted.
struct Tolerances {
    double projection = 1e-12;
    double picard = 1e-12;
    double trigger = 1e-10;
    double invariant = 1e-8;       ///< minimality, saddle inequalities
    double representation = 1e-9;  ///< brute force vs direct solve
    double monotone = 1e-10;       ///< penalization monotonicity slack
};

enum class TaskKind { validate, solve_direct, penalize, double_penalize, saddle, brute_force, export_solution };

std::string_view task_name(TaskKind kind) noexcept;
std::optional<TaskKind> parse_task_name(std::string_view name) noexcept;

struct TaskSpec {
    TaskKind kind = TaskKind::validate;
    // penalize
    std::vector<double> n_list{1, 2, 4, 8, 16, 32};
    // double_penalize
    double n = 4;
    std::vector<double> m_list{1, 2, 4, 8, 16, 32};
    // saddle
    std::size_t catalog_size = 200;
    double switch_prob = 0.3;
    bool literal_tie = false;
    /// Test hook: added to Y(root) before the saddle check.
    double corrupt_root = 0.0;
    // saddle, brute_force
    std::size_t strategy_cap = std::size_t{1} << 22;
    bool exhaustive = false;
};

struct Scenario {
    std::string name;
    std::string origin;  ///< file path or "<memory>"
    GameSpec spec;
    TreeConfig tree;
    Tolerances tol;
    std::uint64_t seed = 0;
    std::vector<TaskSpec> tasks;
    std::string output;
    std::string canonical;  ///< canonical JSON dump, input of the spec hash
};

struct SchemaIssue {
    std::string location;  ///< JSON pointer, or "line:column" for syntax errors
    std::string message;
};

/// Every schema and validation problem found in one scenario document.
class ScenarioError : public ConfigError {
public:
    ScenarioError(std::string origin, std::vector<SchemaIssue> issues);
    const std::vector<SchemaIssue>& issues() const noexcept { return issues_; }
    const std::string& origin() const noexcept { return origin_; }

private:
    std::string origin_;
    std::vector<SchemaIssue> issues_;
};

Scenario parse_scenario_text(const std::string& text, const std::string& origin = "<memory>");
Scenario parse_scenario(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes) noexcept;
/// Per-task seed: independent of task order, fixed by run seed and task name.
std::uint64_t fork_seed(std::uint64_t seed, std::string_view task) noexcept;

}  // namespace oblique
