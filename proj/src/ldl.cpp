#include "ldl.hpp"

#include "projconst/errors.hpp"

#include <cmath>

namespace projconst::detail {

void QuasiDefiniteLdl::analyze(const Matrix &lower) {
    n_ = static_cast<int>(lower.rows());
    Eigen::AMDOrdering<int> amd;
    amd(lower, perm_inv_);
    perm_ = perm_inv_.inverse();
    upper_.resize(n_, n_);
    upper_.selfadjointView<Eigen::Upper>() = lower.selfadjointView<Eigen::Lower>().twistedBy(perm_);

    // Elimination tree and column counts of L.
    const int *Ap = upper_.outerIndexPtr();
    const int *Ai = upper_.innerIndexPtr();
    etree_.assign(static_cast<std::size_t>(n_), -1);
    lnz_.assign(static_cast<std::size_t>(n_), 0);
    std::vector<int> work(static_cast<std::size_t>(n_), -1);
    for (int j = 0; j < n_; ++j) {
        work[static_cast<std::size_t>(j)] = j;
        for (int p = Ap[j]; p < Ap[j + 1]; ++p) {
            int i = Ai[p];
            if (i > j) throw Error(ErrorCode::NumericalFailure, "KKT pattern is not upper triangular");
            while (work[static_cast<std::size_t>(i)] != j) {
                if (etree_[static_cast<std::size_t>(i)] == -1) etree_[static_cast<std::size_t>(i)] = j;
                ++lnz_[static_cast<std::size_t>(i)];
                work[static_cast<std::size_t>(i)] = j;
                i = etree_[static_cast<std::size_t>(i)];
            }
        }
    }
    lp_.assign(static_cast<std::size_t>(n_) + 1, 0);
    for (int i = 0; i < n_; ++i) lp_[static_cast<std::size_t>(i) + 1] = lp_[static_cast<std::size_t>(i)] + lnz_[static_cast<std::size_t>(i)];
    li_.assign(static_cast<std::size_t>(lp_.back()), 0);
    lx_.assign(static_cast<std::size_t>(lp_.back()), 0.0);
    d_.assign(static_cast<std::size_t>(n_), 0.0);
    dinv_.assign(static_cast<std::size_t>(n_), 0.0);
    y_idx_.assign(static_cast<std::size_t>(n_), 0);
    elim_buf_.assign(static_cast<std::size_t>(n_), 0);
    next_space_.assign(static_cast<std::size_t>(n_), 0);
    y_marker_.assign(static_cast<std::size_t>(n_), 0);
    y_vals_.assign(static_cast<std::size_t>(n_), 0.0);
}

int QuasiDefiniteLdl::factorize(const Matrix &lower, const std::vector<signed char> &sign, double eps,
                                double delta) {
    upper_.selfadjointView<Eigen::Upper>() = lower.selfadjointView<Eigen::Lower>().twistedBy(perm_);
    const int *Ap = upper_.outerIndexPtr();
    const int *Ai = upper_.innerIndexPtr();
    const double *Ax = upper_.valuePtr();
    const int *pinv = perm_.indices().data();  // original index -> permuted

    std::vector<signed char> psign(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) psign[static_cast<std::size_t>(pinv[i])] = sign[static_cast<std::size_t>(i)];

    for (int i = 0; i < n_; ++i) next_space_[static_cast<std::size_t>(i)] = lp_[static_cast<std::size_t>(i)];
    int regularized = 0;
    for (int k = 0; k < n_; ++k) {
        int nnz_y = 0;
        double dk = 0.0;
        for (int p = Ap[k]; p < Ap[k + 1]; ++p) {
            const int b = Ai[p];
            if (b == k) {
                dk += Ax[p];
                continue;
            }
            y_vals_[static_cast<std::size_t>(b)] += Ax[p];
            if (y_marker_[static_cast<std::size_t>(b)]) continue;
            y_marker_[static_cast<std::size_t>(b)] = 1;
            elim_buf_[0] = b;
            int nnz_e = 1;
            int next = etree_[static_cast<std::size_t>(b)];
            while (next != -1 && next < k) {
                if (y_marker_[static_cast<std::size_t>(next)]) break;
                y_marker_[static_cast<std::size_t>(next)] = 1;
                elim_buf_[static_cast<std::size_t>(nnz_e++)] = next;
                next = etree_[static_cast<std::size_t>(next)];
            }
            while (nnz_e) y_idx_[static_cast<std::size_t>(nnz_y++)] = elim_buf_[static_cast<std::size_t>(--nnz_e)];
        }
        for (int i = nnz_y - 1; i >= 0; --i) {
            const int c = y_idx_[static_cast<std::size_t>(i)];
            const int tail = next_space_[static_cast<std::size_t>(c)];
            const double yc = y_vals_[static_cast<std::size_t>(c)];
            for (int j = lp_[static_cast<std::size_t>(c)]; j < tail; ++j) {
                y_vals_[static_cast<std::size_t>(li_[static_cast<std::size_t>(j)])] -= lx_[static_cast<std::size_t>(j)] * yc;
            }
            li_[static_cast<std::size_t>(tail)] = k;
            lx_[static_cast<std::size_t>(tail)] = yc * dinv_[static_cast<std::size_t>(c)];
            dk -= yc * lx_[static_cast<std::size_t>(tail)];
            ++next_space_[static_cast<std::size_t>(c)];
            y_vals_[static_cast<std::size_t>(c)] = 0.0;
            y_marker_[static_cast<std::size_t>(c)] = 0;
        }
        const double s = psign[static_cast<std::size_t>(k)];
        if (!(s * dk > eps)) {
            dk = s * delta;
            ++regularized;
        }
        if (!std::isfinite(dk)) return -1;
        d_[static_cast<std::size_t>(k)] = dk;
        dinv_[static_cast<std::size_t>(k)] = 1.0 / dk;
    }
    return regularized;
}

void QuasiDefiniteLdl::solve_in_place(Eigen::VectorXd &b) const {
    Eigen::VectorXd x = perm_ * b;
    for (int i = 0; i < n_; ++i) {
        const double xi = x(i);
        if (xi == 0.0) continue;
        for (int j = lp_[static_cast<std::size_t>(i)]; j < lp_[static_cast<std::size_t>(i) + 1]; ++j) {
            x(li_[static_cast<std::size_t>(j)]) -= lx_[static_cast<std::size_t>(j)] * xi;
        }
    }
    for (int i = 0; i < n_; ++i) x(i) *= dinv_[static_cast<std::size_t>(i)];
    for (int i = n_ - 1; i >= 0; --i) {
        double xi = x(i);
        for (int j = lp_[static_cast<std::size_t>(i)]; j < lp_[static_cast<std::size_t>(i) + 1]; ++j) {
            xi -= lx_[static_cast<std::size_t>(j)] * x(li_[static_cast<std::size_t>(j)]);
        }
        x(i) = xi;
    }
    b = perm_inv_ * x;
}

}  // namespace projconst::detail
