#include "oracles.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracles {

namespace {

// Calls f on every k-subset of {0..n-1}.
template <class F>
void for_each_subset(int n, int k, F &&f) {
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    if (k > n) return;
    while (true) {
        f(idx);
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) return;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
}

}  // namespace

VertexResult enumerate_vertices(const Eigen::VectorXd &c, const Eigen::MatrixXd &Aeq, const Eigen::VectorXd &beq,
                                const Eigen::MatrixXd &Ain, const Eigen::VectorXd &bin, double feas_tol) {
    const int n = static_cast<int>(c.size());
    const int me = static_cast<int>(Aeq.rows());
    const int mi = static_cast<int>(Ain.rows());
    VertexResult best;
    best.value = std::numeric_limits<double>::infinity();
    const int need = n - me;
    if (need < 0) return best;
    for_each_subset(mi, need, [&](const std::vector<int> &act) {
        Eigen::MatrixXd M(n, n);
        Eigen::VectorXd r(n);
        if (me) {
            M.topRows(me) = Aeq;
            r.head(me) = beq;
        }
        for (int i = 0; i < need; ++i) {
            M.row(me + i) = Ain.row(act[static_cast<std::size_t>(i)]);
            r(me + i) = bin(act[static_cast<std::size_t>(i)]);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
        if (lu.rank() < n) return;
        const Eigen::VectorXd x = lu.solve(r);
        if (mi && ((Ain * x - bin).array() > feas_tol * (1.0 + bin.cwiseAbs().array())).any()) return;
        if (me && ((Aeq * x - beq).cwiseAbs().array() > feas_tol * (1.0 + beq.cwiseAbs().array())).any()) return;
        const double v = c.dot(x);
        best.feasible = true;
        if (v < best.value) {
            best.value = v;
            best.x = x;
        }
    });
    return best;
}

double min_eigenvalue(const Eigen::MatrixXd &m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

Eigen::VectorXd cosine_moments(const std::vector<double> &theta, const std::vector<double> &weight, int count) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(count);
    for (std::size_t j = 0; j < theta.size(); ++j) {
        for (int k = 0; k < count; ++k) y(k) += weight[j] * std::cos(k * theta[j]);
    }
    return y;
}

double cheb_series_trig(const Eigen::VectorXd &c, double x) {
    const double t = std::acos(std::clamp(x, -1.0, 1.0));
    double s = 0.0;
    for (Eigen::Index k = 0; k < c.size(); ++k) s += c(k) * std::cos(static_cast<double>(k) * t);
    return s;
}

double abs_max(const Eigen::VectorXd &c) {
    // Power-basis coefficients from T_{k+1} = 2x T_k - T_{k-1}.
    const auto n = c.size();
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd tm = Eigen::VectorXd::Zero(n), t = Eigen::VectorXd::Zero(n);
    t(0) = 1.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        p += c(k) * t;
        Eigen::VectorXd next = -tm;
        for (Eigen::Index i = 0; i + 1 < n; ++i) next(i + 1) += 2.0 * t(i);
        tm = t;
        t = next;
    }
    double best = std::max(std::abs(cheb_series_trig(c, -1.0)), std::abs(cheb_series_trig(c, 1.0)));
    for (int i = 0; i <= 2000; ++i) best = std::max(best, std::abs(cheb_series_trig(c, -1.0 + i / 1000.0)));
    // Roots of p'.
    Eigen::Index deg = n - 1;
    while (deg > 0 && p(deg) == 0.0) --deg;
    if (deg >= 2) {
        Eigen::VectorXd dp(deg);
        for (Eigen::Index i = 1; i <= deg; ++i) dp(i - 1) = static_cast<double>(i) * p(i);
        const Eigen::Index m = deg - 1;
        Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(m, m);
        for (Eigen::Index i = 1; i < m; ++i) comp(i, i - 1) = 1.0;
        for (Eigen::Index i = 0; i < m; ++i) comp(i, m - 1) = -dp(i) / dp(m);
        const Eigen::VectorXcd roots = Eigen::EigenSolver<Eigen::MatrixXd>(comp).eigenvalues();
        for (const auto &r : roots) {
            if (std::abs(r.imag()) > 1e-7 || std::abs(r.real()) > 1.0) continue;
            // Polish with a few Newton steps on p'.
            double x = r.real();
            for (int it = 0; it < 5; ++it) {
                double f = 0.0, g = 0.0;
                for (Eigen::Index i = m; i >= 0; --i) {
                    g = g * x + f;
                    f = f * x + dp(i);
                }
                if (g == 0.0) break;
                const double nx = x - f / g;
                if (std::abs(nx) > 1.0) break;
                x = nx;
            }
            best = std::max(best, std::abs(cheb_series_trig(c, x)));
        }
    }
    return best;
}

double discrete_projection_norm(const Eigen::MatrixXd &U, const Eigen::MatrixXd &A, const std::vector<double> &x) {
    double best = 0.0;
    for (double xi : x) {
        Eigen::VectorXd u(U.cols());
        for (Eigen::Index m = 0; m < U.cols(); ++m) u(m) = cheb_series_trig(U.col(m), xi);
        best = std::max(best, (A.transpose() * u).cwiseAbs().sum());
    }
    return best;
}

Eigen::MatrixXd lagrange_basis(const std::vector<double> &v, const std::vector<double> &x) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(x.size()));
    for (std::size_t k = 0; k < v.size(); ++k) {
        for (std::size_t j = 0; j < x.size(); ++j) {
            double l = 1.0;
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i != k) l *= (x[j] - v[i]) / (v[k] - v[i]);
            }
            out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = l;
        }
    }
    return out;
}

}  // namespace oracles
