#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace projconst::cli {

enum class OutputFormat { Json, Csv, Text };

struct RunConfig {
    std::string command;  // upper, lower, bracket, table1, table2, measures, shape-check, validate
    std::string space;
    std::optional<int> K, L, S;
    std::optional<double> gap;
    std::optional<double> budget_seconds;
    int d_max = 6;        // table2
    std::string input;    // shape-check: stored measures JSON
    OutputFormat format = OutputFormat::Json;
    std::uint64_t seed = 1;
    bool symmetric = true;
    bool timings = false;  // wall times make the output non-reproducible
    int threads = 0;       // 0: hardware concurrency, capped by PROJCONST_THREADS
};

/// Exit codes of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitBudget = 3;
inline constexpr int kExitValidation = 4;

/// Runs one subcommand and writes its report to `out`. Failures are written
/// to `out` as {"error": {...}} and reported through the exit code.
int run(const RunConfig &cfg, std::ostream &out);

/// Number of workers for table runs: hardware concurrency (or cfg.threads)
/// capped by the PROJCONST_THREADS environment variable.
[[nodiscard]] int worker_count(int requested);

/// Formats a double with at most 12 significant digits, shortest form.
[[nodiscard]] std::string format_number(double value);

}  // namespace projconst::cli
