#include "projconst/lp_solver.hpp"

#include "projconst/errors.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace projconst {

namespace {

void check_block(const SparseMatrix &m, const Eigen::VectorXd &rhs, int n, const char *name) {
    if (m.rows() == 0 && rhs.size() == 0) return;
    if (m.cols() != n) {
        throw Error(ErrorCode::DimensionMismatch, std::string(name) + " block has " + std::to_string(m.cols()) +
                                                      " columns, expected " + std::to_string(n));
    }
    if (m.rows() != rhs.size()) {
        throw Error(ErrorCode::DimensionMismatch, std::string(name) + " block and right-hand side differ in length");
    }
    if (!rhs.allFinite()) throw Error(ErrorCode::InvalidArgument, std::string(name) + " right-hand side not finite");
}

}  // namespace

LpSolution solve_lp(const LinearProgram &lp, const ToleranceConfig &tol) {
    const int n = lp.num_vars();
    if (!lp.objective.allFinite()) throw Error(ErrorCode::InvalidArgument, "objective not finite");
    check_block(lp.eq_matrix, lp.eq_rhs, n, "equality");
    check_block(lp.ineq_matrix, lp.ineq_rhs, n, "inequality");
    if (lp.lower.size() != 0 && lp.lower.size() != n) throw Error(ErrorCode::DimensionMismatch, "lower bounds");
    if (lp.upper.size() != 0 && lp.upper.size() != n) throw Error(ErrorCode::DimensionMismatch, "upper bounds");
    if (lp.nonzeros() > tol.max_problem_size) {
        throw Error(ErrorCode::ProblemTooLarge, "LP has " + std::to_string(lp.nonzeros()) +
                                                    " nonzeros, limit " + std::to_string(tol.max_problem_size));
    }

    const int m_eq = static_cast<int>(lp.eq_rhs.size());
    const int m_in = static_cast<int>(lp.ineq_rhs.size());
    std::vector<int> lower_idx, upper_idx;
    for (int i = 0; i < lp.lower.size(); ++i) {
        if (std::isnan(lp.lower(i))) throw Error(ErrorCode::InvalidArgument, "NaN lower bound");
        if (lp.lower(i) > -std::numeric_limits<double>::infinity()) lower_idx.push_back(i);
    }
    for (int i = 0; i < lp.upper.size(); ++i) {
        if (std::isnan(lp.upper(i))) throw Error(ErrorCode::InvalidArgument, "NaN upper bound");
        if (lp.upper(i) < std::numeric_limits<double>::infinity()) upper_idx.push_back(i);
    }

    conic::Problem p;
    p.c = lp.objective;
    if (m_eq > 0) {
        p.A = lp.eq_matrix;
    } else {
        p.A.resize(0, n);
    }
    p.b = lp.eq_rhs.size() ? lp.eq_rhs : Eigen::VectorXd::Zero(0);

    const int m_g = m_in + static_cast<int>(lower_idx.size() + upper_idx.size());
    std::vector<Eigen::Triplet<double, int>> trip;
    trip.reserve(static_cast<std::size_t>(lp.ineq_matrix.nonZeros()) + lower_idx.size() + upper_idx.size());
    for (int col = 0; col < lp.ineq_matrix.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(lp.ineq_matrix, col); it; ++it) trip.emplace_back(it.row(), col, it.value());
    }
    p.h.resize(m_g);
    if (m_in) p.h.head(m_in) = lp.ineq_rhs;
    int row = m_in;
    for (int i : lower_idx) {
        trip.emplace_back(row, i, -1.0);
        p.h(row++) = -lp.lower(i);
    }
    for (int i : upper_idx) {
        trip.emplace_back(row, i, 1.0);
        p.h(row++) = lp.upper(i);
    }
    p.G.resize(m_g, n);
    p.G.setFromTriplets(trip.begin(), trip.end());

    const conic::Solution s = conic::solve(p, tol);

    LpSolution out;
    out.status = s.status;
    out.x = s.x;
    out.iterations = s.iterations;
    out.primal_residual = s.primal_residual;
    out.dual_residual = s.dual_residual;
    out.gap = s.gap;
    out.dual_eq = s.y;
    out.dual_ineq = s.z.size() ? Eigen::VectorXd(s.z.head(m_in)) : Eigen::VectorXd::Zero(m_in);
    out.dual_lower = Eigen::VectorXd::Zero(n);
    out.dual_upper = Eigen::VectorXd::Zero(n);
    if (s.z.size() == m_g) {
        row = m_in;
        for (int i : lower_idx) out.dual_lower(i) = s.z(row++);
        for (int i : upper_idx) out.dual_upper(i) = s.z(row++);
    }
    switch (s.status) {
        case SolveStatus::Infeasible:
            out.objective_value = std::numeric_limits<double>::infinity();
            out.dual_objective = 1.0;
            break;
        case SolveStatus::Unbounded:
            out.objective_value = -std::numeric_limits<double>::infinity();
            out.dual_objective = -std::numeric_limits<double>::infinity();
            break;
        default:
            out.objective_value = s.primal_objective;
            out.dual_objective = s.dual_objective;
    }
    return out;
}

}  // namespace projconst
