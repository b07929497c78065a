#pragma once

#include "projconst/conic.hpp"

#include <Eigen/Dense>

namespace projconst {

/// min objective'x  s.t.  eq_matrix x = eq_rhs,  ineq_matrix x <= ineq_rhs,
/// lower <= x <= upper. Empty bound vectors mean "no bound"; individual
/// entries may be +-infinity.
struct LinearProgram {
    Eigen::VectorXd objective;
    SparseMatrix eq_matrix;
    Eigen::VectorXd eq_rhs;
    SparseMatrix ineq_matrix;
    Eigen::VectorXd ineq_rhs;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    [[nodiscard]] int num_vars() const noexcept { return static_cast<int>(objective.size()); }
    [[nodiscard]] std::size_t nonzeros() const noexcept {
        return static_cast<std::size_t>(eq_matrix.nonZeros() + ineq_matrix.nonZeros());
    }
};

struct LpSolution {
    SolveStatus status = SolveStatus::NumericalFailure;
    /// Optimal: minimizer. Unbounded: a recession ray with objective'ray = -1.
    Eigen::VectorXd x;
    double objective_value = 0.0;
    double dual_objective = 0.0;
    /// Lagrangian multipliers: objective + eq' dual_eq + ineq' dual_ineq
    /// - dual_lower + dual_upper = 0 with dual_ineq, dual_lower, dual_upper >= 0.
    /// Infeasible: a Farkas certificate normalised so that the dual
    /// objective of the certificate is 1.
    Eigen::VectorXd dual_eq;
    Eigen::VectorXd dual_ineq;
    Eigen::VectorXd dual_lower;
    Eigen::VectorXd dual_upper;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    int iterations = 0;
};

/// Interior point LP solve. Throws DimensionMismatch on malformed input,
/// ProblemTooLarge above tol.max_problem_size nonzeros.
[[nodiscard]] LpSolution solve_lp(const LinearProgram &lp,
                                  const ToleranceConfig &tol = ToleranceConfig::lp_defaults());

}  // namespace projconst
