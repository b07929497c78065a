#pragma once

#include "projconst/conic.hpp"

#include <Eigen/Dense>

#include <vector>

namespace projconst {

/// min objective'x  s.t.  eq_matrix x = eq_rhs,  ineq_matrix x <= ineq_rhs,
/// x_i >= 0 for i in nonneg,  psd_blocks[j](x) PSD.
struct ConicProgram {
    Eigen::VectorXd objective;
    SparseMatrix eq_matrix;
    Eigen::VectorXd eq_rhs;
    SparseMatrix ineq_matrix;
    Eigen::VectorXd ineq_rhs;
    std::vector<int> nonneg;
    std::vector<PsdBlock> psd_blocks;

    [[nodiscard]] int num_vars() const noexcept { return static_cast<int>(objective.size()); }
    [[nodiscard]] std::size_t psd_dimension() const noexcept;
};

struct SdpSolution {
    SolveStatus status = SolveStatus::NumericalFailure;
    Eigen::VectorXd x;
    double objective_value = 0.0;
    double dual_objective = 0.0;
    std::vector<double> min_eigenvalue_per_block;
    Eigen::VectorXd dual_eq;
    std::vector<Eigen::MatrixXd> dual_psd;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    int iterations = 0;
};

/// Symmetric S x S Toeplitz matrix with entry (i, j) = y[|i - j|].
/// Throws InvalidArgument when S < 1 or S > y.size().
[[nodiscard]] Eigen::MatrixXd toeplitz_from_vector(const Eigen::Ref<const Eigen::VectorXd> &y, int S);

/// Throws DimensionMismatch on malformed input and ProblemTooLarge when the
/// total PSD order exceeds tol.max_problem_size.
[[nodiscard]] SdpSolution solve_sdp(const ConicProgram &cp,
                                    const ToleranceConfig &tol = ToleranceConfig::sdp_defaults());

}  // namespace projconst
