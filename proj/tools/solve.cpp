// solve <scenario> [--out DIR] [--seed S] [--tasks LIST] [--tolerance T]
//
// Exit codes: 0 success, 1 an asserted invariant failed, 2 configuration error.
// Worker threads: OBLIQUE_WORKERS (default: hardware concurrency).

#include <iostream>

#include "CLI11.hpp"
#include "oblique/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Reflected BSDE solver for two-player switching games on a Brownian tree"};
    std::string scenario_path, out_dir;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> tasks;
    std::optional<double> tolerance;
    app.add_option("scenario", scenario_path, "Scenario file (JSON)")->required();
    app.add_option("--out", out_dir, "Output directory (default: scenario 'output', else out/<name>)");
    app.add_option("--seed", seed, "Run seed, overrides the scenario seed");
    app.add_option("--tasks", tasks, "Comma-separated tasks to run, in order")->delimiter(',');
    app.add_option("--tolerance", tolerance, "Assertion tolerance for invariant checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : oblique::kExitConfig;
    }

    try {
        const oblique::Scenario scenario = oblique::parse_scenario(scenario_path);
        oblique::RunOptions opts;
        opts.out_dir = out_dir;
        opts.seed = seed;
        if (!tasks.empty()) opts.tasks = tasks;
        opts.tolerance = tolerance;
        opts.log = &std::cout;
        const oblique::RunResult r = oblique::run(scenario, opts);
        std::cout << "reports: " << r.out_dir.string() << "\n";
        return r.exit_code;
    } catch (const oblique::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return oblique::kExitConfig;
    } catch (const oblique::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return oblique::kExitConfig;
    }
}
