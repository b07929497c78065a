#pragma once

#include "projconst/errors.hpp"
#include "projconst/lower_bound.hpp"
#include "projconst/upper_bound.hpp"

#include <optional>
#include <string>
#include <limits>
#include <vector>

namespace projconst {

/// Refinement schedule for a bracket. Zero initial parameters select
/// (K, L, S) = (4(d+1)+1, 4(d+1), 2(d+1)).
struct ScheduleConfig {
    int K0 = 0;
    int L0_upper = 0;
    int L0_lower = 0;
    int S0 = 0;
    double growth = 1.6;
    double target_gap = 1e-3;
    /// Wall-clock budget; a refinement is not started once the elapsed time
    /// plus an estimate of its cost exceeds it.
    double max_seconds = 600.0;
    /// Dimension budget: largest K and S the schedule may reach.
    int max_K = 2001;
    int max_S = 60;
    bool symmetric = true;
    ToleranceConfig upper_tol = UpperConfig::default_tolerances();
    ToleranceConfig lower_tol = LowerConfig::default_tolerances();
};

struct TraceEntry {
    BoundSide side = BoundSide::Upper;
    int K = 0, L = 0, S = 0;
    double value = 0.0;  // raw bound of this refinement
    double best = 0.0;   // best bound on this side so far
    double seconds = 0.0;
};

struct Bracket {
    BoundResult lower;
    BoundResult upper;
    double gap = 0.0;
    bool converged = false;
    std::vector<TraceEntry> trace;

    [[nodiscard]] bool contains(double value) const noexcept {
        return lower.value <= value && value <= upper.value;
    }
    [[nodiscard]] bool intersects(double lo, double hi) const noexcept {
        return lower.value <= hi && lo <= upper.value;
    }
};

/// Raised when the budget runs out before the target gap; carries the best
/// bracket found, which is still valid.
class BudgetExhausted : public Error {
public:
    explicit BudgetExhausted(Bracket best)
        : Error(ErrorCode::BudgetExhausted, "budget exhausted before the target gap"), best_(std::move(best)) {}
    [[nodiscard]] const Bracket &bracket() const noexcept { return best_; }

private:
    Bracket best_;
};

[[nodiscard]] Bracket bracket(const PolySpace &space, const ScheduleConfig &schedule);

/// Reference values printed for a table row.
struct KnownValues {
    std::optional<double> value;        // Table 1
    std::optional<double> known_lower;  // Table 2, earlier literature
    std::optional<double> paper_lower;  // Table 2, moment method
    std::optional<double> paper_upper;
    std::optional<double> known_upper;
};

struct TableRow {
    std::string label;
    std::string spec;  // space specification, e.g. "cheb1:1,2,3"
    KnownValues known;
    std::optional<Bracket> bracket;
    bool budget_exhausted = false;
    std::string error;  // set when the row failed
};

struct TableReport {
    std::string title;
    std::vector<TableRow> rows;
};

/// Table 1 spaces with their printed values.
[[nodiscard]] std::vector<TableRow> threedim_rows();
/// Table 2 rows for d = 2..d_max (2 <= d_max <= 12).
[[nodiscard]] std::vector<TableRow> degree_rows(int d_max);

/// Brackets every row with `threads` workers (at least one).
[[nodiscard]] TableReport run_table(std::string title, std::vector<TableRow> rows, const ScheduleConfig &schedule,
                                    int threads);
[[nodiscard]] TableReport table_threedim(const ScheduleConfig &schedule, int threads = 1);
[[nodiscard]] TableReport table_degrees(int d_max, const ScheduleConfig &schedule, int threads = 1);

}  // namespace projconst
