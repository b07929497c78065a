#pragma once

// Independent reference computations used to check the solvers and bound
// programs. Nothing here shares code with the interior point method.

#include <Eigen/Dense>

#include <vector>

namespace oracles {

struct VertexResult {
    bool feasible = false;  // some basic feasible point exists
    double value = 0.0;     // best objective over basic feasible points
    Eigen::VectorXd x;
};

/// min c'x s.t. Aeq x = beq, Ain x <= bin by enumerating every basic point
/// (n linearly independent active constraints). Exponential; tiny problems only.
VertexResult enumerate_vertices(const Eigen::VectorXd &c, const Eigen::MatrixXd &Aeq, const Eigen::VectorXd &beq,
                                const Eigen::MatrixXd &Ain, const Eigen::VectorXd &bin, double feas_tol = 1e-9);

/// Smallest eigenvalue of a symmetric matrix (dense QR iteration).
double min_eigenvalue(const Eigen::MatrixXd &m);

/// y_k = sum_j w_j cos(k theta_j), k = 0..count-1.
Eigen::VectorXd cosine_moments(const std::vector<double> &theta, const std::vector<double> &weight, int count);

/// sum_k c_k T_k(x) with T_k(x) = cos(k arccos x).
double cheb_series_trig(const Eigen::VectorXd &c, double x);

/// max over [-1, 1] of |sum_k c_k T_k| from the roots of the derivative in
/// the power basis (companion matrix), the endpoints and a 2001-point scan.
double abs_max(const Eigen::VectorXd &c);

/// Norm of f -> sum_m (sum_k A(m,k) f(v_k)) u_m estimated as the maximum over `x` of
/// sum_k |sum_m A(m,k) u_m(x)|; U holds the Chebyshev coefficients of u_m.
double discrete_projection_norm(const Eigen::MatrixXd &U, const Eigen::MatrixXd &A, const std::vector<double> &x);

/// Lagrange basis at nodes v evaluated at x (rows: nodes).
Eigen::MatrixXd lagrange_basis(const std::vector<double> &v, const std::vector<double> &x);

}  // namespace oracles
