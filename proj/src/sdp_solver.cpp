#include "projconst/sdp_solver.hpp"

#include "projconst/errors.hpp"

#include <Eigen/Eigenvalues>

#include <limits>
#include <string>

namespace projconst {

std::size_t ConicProgram::psd_dimension() const noexcept {
    std::size_t total = 0;
    for (const auto &b : psd_blocks) total += static_cast<std::size_t>(b.order);
    return total;
}

Eigen::MatrixXd toeplitz_from_vector(const Eigen::Ref<const Eigen::VectorXd> &y, int S) {
    if (S < 1) throw Error(ErrorCode::InvalidArgument, "Toeplitz order must be positive");
    if (S > y.size()) {
        throw Error(ErrorCode::InvalidArgument, "Toeplitz order " + std::to_string(S) + " exceeds vector length " +
                                                    std::to_string(y.size()));
    }
    return toeplitz_matrix(y, S);
}

SdpSolution solve_sdp(const ConicProgram &cp, const ToleranceConfig &tol) {
    const int n = cp.num_vars();
    if (!cp.objective.allFinite()) throw Error(ErrorCode::InvalidArgument, "objective not finite");
    if (cp.eq_rhs.size() != cp.eq_matrix.rows() || (cp.eq_matrix.rows() > 0 && cp.eq_matrix.cols() != n)) {
        throw Error(ErrorCode::DimensionMismatch, "equality block shape");
    }
    if (cp.ineq_rhs.size() != cp.ineq_matrix.rows() || (cp.ineq_matrix.rows() > 0 && cp.ineq_matrix.cols() != n)) {
        throw Error(ErrorCode::DimensionMismatch, "inequality block shape");
    }
    for (const auto &b : cp.psd_blocks) {
        if (b.order < 1) throw Error(ErrorCode::DimensionMismatch, "PSD block of order < 1");
    }
    for (int i : cp.nonneg) {
        if (i < 0 || i >= n) throw Error(ErrorCode::DimensionMismatch, "nonnegative index out of range");
    }
    if (cp.psd_dimension() > tol.max_problem_size) {
        throw Error(ErrorCode::ProblemTooLarge, "total PSD order " + std::to_string(cp.psd_dimension()) +
                                                    " exceeds limit " + std::to_string(tol.max_problem_size));
    }

    conic::Problem p;
    p.c = cp.objective;
    if (cp.eq_matrix.rows() > 0) {
        p.A = cp.eq_matrix;
    } else {
        p.A.resize(0, n);
    }
    p.b = cp.eq_rhs;
    const auto m_in = static_cast<int>(cp.ineq_rhs.size());
    std::vector<Eigen::Triplet<double, int>> trip;
    for (int col = 0; col < cp.ineq_matrix.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(cp.ineq_matrix, col); it; ++it) trip.emplace_back(it.row(), col, it.value());
    }
    int row = m_in;
    for (int i : cp.nonneg) trip.emplace_back(row++, i, -1.0);
    p.G.resize(row, n);
    p.G.setFromTriplets(trip.begin(), trip.end());
    p.h = Eigen::VectorXd::Zero(row);
    if (m_in) p.h.head(m_in) = cp.ineq_rhs;
    p.psd = cp.psd_blocks;

    const conic::Solution s = conic::solve(p, tol);

    SdpSolution out;
    out.status = s.status;
    out.x = s.x;
    out.iterations = s.iterations;
    out.primal_residual = s.primal_residual;
    out.dual_residual = s.dual_residual;
    out.gap = s.gap;
    out.dual_eq = s.y;
    out.dual_psd = s.Z;
    if (s.status == SolveStatus::Infeasible) {
        out.objective_value = std::numeric_limits<double>::infinity();
        out.dual_objective = 1.0;
    } else if (s.status == SolveStatus::Unbounded) {
        out.objective_value = -std::numeric_limits<double>::infinity();
        out.dual_objective = -std::numeric_limits<double>::infinity();
    } else {
        out.objective_value = s.primal_objective;
        out.dual_objective = s.dual_objective;
    }
    if (s.x.size() == n) {
        for (const auto &b : cp.psd_blocks) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.evaluate(s.x), Eigen::EigenvaluesOnly);
            out.min_eigenvalue_per_block.push_back(es.eigenvalues()(0));
        }
    }
    return out;
}

}  // namespace projconst
