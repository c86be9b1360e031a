#pragma once
// Subcommand implementations behind the CLI: run a scenario, write the result
// bundle (result.json plus CSVs) into the output directory, and map failures
// to exit codes. All numeric CSV output is deterministic for a given scenario
// and seed; wall-clock time appears only in result.json.

#include <cstdint>
#include <optional>
#include <string>

namespace fifotap {

struct RunOptions {
    std::string scenario_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;  // overrides the scenario seed
    std::optional<double> delta_tau;
    std::optional<double> tol;
    std::optional<int> max_perturb;
    std::optional<std::string> flows;  // comma-separated initial route flows
    std::optional<double> init_split;  // dynamic: share of demand on route 0
    bool random_start = false;         // dynamic: seeded random profile instead
    int starts = 64;                   // enumeration start count
};

inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 2;
inline constexpr int exit_not_converged = 3;
inline constexpr int exit_io = 4;

int run_solve_static(const RunOptions& opt);
int run_solve_elastic(const RunOptions& opt);
int run_solve_dynamic(const RunOptions& opt);
int run_classify(const RunOptions& opt);
int run_enumerate(const RunOptions& opt);

}  // namespace fifotap
