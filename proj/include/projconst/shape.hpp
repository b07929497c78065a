#pragma once

#include "projconst/bound.hpp"
#include "projconst/space.hpp"
#include "projconst/upper_bound.hpp"

#include <Eigen/Dense>

#include <span>

namespace projconst {

/// Order-d forward differences on a grid of 2K+1 values: row k is
/// sum_j (-1)^(d-j) binom(d, j) f_{k+j}, k = 0..2K-d.
[[nodiscard]] Eigen::MatrixXd finite_difference_operator(int d, int K);

struct ConvexityTest {
    Eigen::VectorXd a;  // weights on f(k/K), k = -K..K
    int d = 3;
    double bound = 1.0;  // |f_k| <= bound
};

enum class ShapeVerdict { Preserved, Violated };

std::string_view to_string(ShapeVerdict verdict) noexcept;

struct ShapeResult {
    ShapeVerdict verdict = ShapeVerdict::Preserved;
    /// min <a, f> over discretely d-convex f with |f| <= bound.
    double value = 0.0;
    Eigen::VectorXd witness;
    SolverReport solver;
};

inline constexpr double kShapeTolerance = 1e-8;

/// Throws InvalidArgument on a non-finite a, a non-positive bound or a length
/// that is not 2K+1 > d.
[[nodiscard]] ShapeResult convexity_violation(const ConvexityTest &test);

/// Weights of the functional returning the x^d coefficient, sum_m lead(u_m) A(m, :),
/// for a measure matrix on the grid k/K (support sorted, 2K+1 points).
/// Throws InvalidGrid when the support is not that grid.
[[nodiscard]] Eigen::VectorXd leading_weights(const Eigen::MatrixXd &A, std::span<const double> support,
                                              const PolySpace &space);

}  // namespace projconst
