#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace projconst {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterLimit, NumericalFailure };

std::string_view to_string(SolveStatus status) noexcept;

/// Solver tolerances and desk-scale limits. The LP and SDP front ends use
/// different defaults, see lp_defaults() / sdp_defaults().
struct ToleranceConfig {
    double feas_tol = 1e-9;
    double gap_tol = 1e-9;
    double psd_tol = 1e-8;
    /// 0 selects 50 * (rows + cols), capped at kIterationCap.
    int max_iterations = 0;
    /// LP: constraint-matrix nonzeros. SDP: sum of PSD block orders.
    std::size_t max_problem_size = 200000;
    bool verbose = false;

    static ToleranceConfig lp_defaults();
    static ToleranceConfig sdp_defaults();
};

inline constexpr int kIterationCap = 400;

/// One term coef * x[var] * B of an affine PSD map, where B is either the
/// symmetric Toeplitz pattern E_k (ones on diagonals +-k) or the symmetric
/// unit matrix at (i, j).
struct PsdTerm {
    enum class Kind : std::uint8_t { Toeplitz, Entry };

    Kind kind = Kind::Toeplitz;
    int var = 0;
    double coef = 0.0;
    int i = 0;  // Toeplitz: diagonal offset k; Entry: row
    int j = 0;  // Entry: column

    static PsdTerm toeplitz(int var, int offset, double coef) {
        return {Kind::Toeplitz, var, coef, offset, 0};
    }
    static PsdTerm entry(int var, int row, int col, double coef) {
        return {Kind::Entry, var, coef, row, col};
    }
};

/// Affine map x -> constant + sum_t coef_t x[var_t] B_t into order x order
/// symmetric matrices. The map is symmetric by construction.
struct PsdBlock {
    int order = 1;
    Eigen::MatrixXd constant;  // empty means zero
    std::vector<PsdTerm> terms;

    [[nodiscard]] Eigen::MatrixXd evaluate(const Eigen::VectorXd &x) const;
    /// Adds coef * <B_t, Z> into out[var_t] for every term (adjoint map).
    void adjoint_add(const Eigen::MatrixXd &Z, double scale, Eigen::VectorXd &out) const;
};

/// Symmetric Toeplitz matrix with entry (i, j) = y[|i - j|].
[[nodiscard]] Eigen::MatrixXd toeplitz_matrix(const Eigen::Ref<const Eigen::VectorXd> &y, int order);

/// table(a, b) = trace(E_a Q E_b Q) for the Toeplitz patterns E_0 = I,
/// E_a = J^a + J^{-a}; Q symmetric.
[[nodiscard]] Eigen::MatrixXd toeplitz_pairing(const Eigen::MatrixXd &Q);

namespace conic {

/// min c'x  s.t.  A x = b,  G x <= h (componentwise),  block_j(x) PSD.
struct Problem {
    Eigen::VectorXd c;
    SparseMatrix A;
    Eigen::VectorXd b;
    SparseMatrix G;
    Eigen::VectorXd h;
    std::vector<PsdBlock> psd;
};

struct Solution {
    SolveStatus status = SolveStatus::NumericalFailure;
    Eigen::VectorXd x;               // primal point, or unbounded ray
    Eigen::VectorXd y;               // equality multipliers (c + A'y + G'z - sum F'Z = 0)
    Eigen::VectorXd z;               // inequality multipliers, >= 0
    std::vector<Eigen::MatrixXd> Z;  // PSD multipliers
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    int iterations = 0;
};

/// Homogeneous self-dual primal-dual interior point method with
/// Nesterov-Todd scaling and Mehrotra predictor-corrector steps.
[[nodiscard]] Solution solve(const Problem &problem, const ToleranceConfig &tol);

}  // namespace conic
}  // namespace projconst
