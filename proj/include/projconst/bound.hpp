#pragma once

#include "projconst/conic.hpp"

#include <string>

namespace projconst {

enum class BoundSide { Lower, Upper };
enum class ProgramMode { General, Symmetric };

std::string_view to_string(ProgramMode mode) noexcept;

/// What the solver reported for the program behind a bound.
struct SolverReport {
    SolveStatus status = SolveStatus::NumericalFailure;
    int iterations = 0;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
};

/// A one-sided bound on the projection constant together with the
/// parameters that produced it.
struct BoundResult {
    BoundSide side = BoundSide::Upper;
    double value = 0.0;
    ProgramMode mode = ProgramMode::General;
    int K = 0;  // upper bounds only
    int L = 0;
    int S = 0;  // lower bounds only
    double rho = 1.0;  // upper bounds only
    /// Optimal value of the finite program before rho and margins.
    double program_value = 0.0;
    /// Safety margin already folded into value.
    double margin = 0.0;
    SolverReport solver;
    double seconds = 0.0;
};

}  // namespace projconst
