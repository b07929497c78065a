#include "projconst/shape.hpp"

#include "projconst/errors.hpp"
#include "projconst/lp_solver.hpp"

#include <cmath>

namespace projconst {

std::string_view to_string(ShapeVerdict verdict) noexcept {
    return verdict == ShapeVerdict::Preserved ? "preserved" : "violated";
}

Eigen::MatrixXd finite_difference_operator(int d, int K) {
    if (d < 0 || K < 0) throw Error(ErrorCode::InvalidArgument, "order and grid size must be nonnegative");
    const int n = 2 * K + 1;
    if (n <= d) throw Error(ErrorCode::InvalidArgument, "grid of " + std::to_string(n) + " values too small for order " + std::to_string(d));
    std::vector<double> stencil(static_cast<std::size_t>(d) + 1);
    double binom = 1.0;
    for (int j = 0; j <= d; ++j) {
        stencil[static_cast<std::size_t>(j)] = ((d - j) % 2 ? -1.0 : 1.0) * binom;
        binom = binom * (d - j) / (j + 1);
    }
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n - d, n);
    for (int k = 0; k < n - d; ++k) {
        for (int j = 0; j <= d; ++j) D(k, k + j) = stencil[static_cast<std::size_t>(j)];
    }
    return D;
}

ShapeResult convexity_violation(const ConvexityTest &test) {
    const auto n = test.a.size();
    if (n % 2 == 0) throw Error(ErrorCode::InvalidArgument, "weight vector must have odd length 2K+1");
    if (!test.a.allFinite()) throw Error(ErrorCode::InvalidArgument, "weights must be finite");
    if (!(test.bound > 0.0) || !std::isfinite(test.bound)) throw Error(ErrorCode::InvalidArgument, "bound must be positive");
    const int K = static_cast<int>(n / 2);
    const Eigen::MatrixXd D = finite_difference_operator(test.d, K);

    LinearProgram lp;
    lp.objective = test.a;
    lp.ineq_matrix = (-D).sparseView();
    lp.ineq_rhs = Eigen::VectorXd::Zero(D.rows());
    lp.lower = Eigen::VectorXd::Constant(n, -test.bound);
    lp.upper = Eigen::VectorXd::Constant(n, test.bound);
    ToleranceConfig tol = ToleranceConfig::lp_defaults();
    tol.max_problem_size = std::max(tol.max_problem_size, static_cast<std::size_t>(64 * n * (test.d + 3)));
    const LpSolution s = solve_lp(lp, tol);
    if (s.status != SolveStatus::Optimal) {
        throw Error(ErrorCode::NumericalFailure, std::string("shape LP ended with status ") + std::string(to_string(s.status)));
    }
    ShapeResult r;
    r.value = s.objective_value;
    r.witness = s.x;
    r.verdict = r.value >= -kShapeTolerance ? ShapeVerdict::Preserved : ShapeVerdict::Violated;
    r.solver = {s.status, s.iterations, s.objective_value, s.dual_objective, s.primal_residual, s.dual_residual, s.gap};
    return r;
}

Eigen::VectorXd leading_weights(const Eigen::MatrixXd &A, std::span<const double> support, const PolySpace &space) {
    const auto n = static_cast<Eigen::Index>(support.size());
    if (A.cols() != n || A.rows() != space.dim()) throw Error(ErrorCode::DimensionMismatch, "measure matrix does not match the space");
    if (n % 2 == 0 || n < 3) throw Error(ErrorCode::InvalidGrid, "support must have 2K+1 >= 3 points");
    const int K = static_cast<int>(n / 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(support[static_cast<std::size_t>(i)] - static_cast<double>(i - K) / K) > 1e-10) {
            throw Error(ErrorCode::InvalidGrid, "support is not the grid k/K");
        }
    }
    // x^d coefficient of sum_k c_k T_k is 2^(d-1) c_d for d >= 1.
    const int d = space.degree();
    const double scale = d == 0 ? 1.0 : std::ldexp(1.0, d - 1);
    const Eigen::MatrixXd C = space.padded_coefficients(d + 1);
    return (scale * C.row(d)) * A;
}

}  // namespace projconst
