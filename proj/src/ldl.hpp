#pragma once

// Sparse LDL' for quasi-definite KKT systems. Pivots whose sign disagrees
// with the expected inertia (or that are tiny) are replaced by a small value
// of the right sign; the caller is expected to apply iterative refinement.

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>

#include <vector>

namespace projconst::detail {

class QuasiDefiniteLdl {
public:
    using Matrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

    /// Symbolic analysis on the lower triangle of K (pattern only).
    void analyze(const Matrix &lower);
    /// Numeric factorization; sign[i] = +1 or -1 is the expected sign of
    /// pivot i in the original ordering. Returns the number of regularized pivots, or -1 when a pivot
    /// is not finite.
    int factorize(const Matrix &lower, const std::vector<signed char> &sign, double eps, double delta);
    void solve_in_place(Eigen::VectorXd &b) const;

private:
    int n_ = 0;
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm_, perm_inv_;
    Matrix upper_;  // permuted upper triangle
    std::vector<int> etree_, lnz_, lp_, li_;
    std::vector<double> lx_, d_, dinv_;
    // Workspace.
    std::vector<int> y_idx_, elim_buf_, next_space_;
    std::vector<char> y_marker_;
    std::vector<double> y_vals_;
};

}  // namespace projconst::detail
