#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oblique/scenario.hpp"

namespace oblique {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariant = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kManifestVersion = 1;

struct RunOptions {
    /// Empty: the scenario's "output" field, else out/<scenario name>.
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed;
    /// Task names to run, in this order. Parameters come from the scenario's
    /// entry of the same kind when there is one, else defaults.
    std::optional<std::vector<std::string>> tasks;
    /// Overrides every assertion tolerance (invariant and representation).
    std::optional<double> tolerance;
    std::ostream* log = nullptr;
};

enum class TaskStatus { ok, failed, error, skipped };
std::string_view status_name(TaskStatus s) noexcept;

struct TaskOutcome {
    std::string name;
    TaskStatus status = TaskStatus::ok;
    std::string message;
    double seconds = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::string> files;
    std::vector<std::string> findings;  ///< logged observations that are not failures
    std::vector<std::pair<std::string, double>> metrics;
};

struct RunResult {
    int exit_code = kExitOk;
    std::filesystem::path out_dir;
    std::vector<TaskOutcome> tasks;
};

/// Resolves a --tasks list against the scenario plan. Throws ConfigError on
/// unknown names.
std::vector<TaskSpec> select_tasks(const Scenario& s, const std::vector<std::string>& names);

/// Every precondition of the planned tasks that can be checked without
/// solving: tree size, contraction, terminal in the domain, enumeration caps.
/// Throws ConfigError listing all of them.
void check_preconditions(const Scenario& s, const std::vector<TaskSpec>& tasks);

/// Runs the tasks in order and writes one report per task plus manifest.json.
/// Precondition failures throw ConfigError before any task runs.
RunResult run(const Scenario& s, const RunOptions& opts = {});

}  // namespace oblique
