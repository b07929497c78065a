#pragma once

#include "projconst/bound.hpp"
#include "projconst/lp_solver.hpp"
#include "projconst/space.hpp"

#include <span>
#include <vector>

namespace projconst {

/// Default relative threshold below which atoms are left out of summaries.
inline constexpr double kAtomThreshold = 1e-6;

struct UpperConfig {
    int K = 0;  // Dirac support size
    int L = 0;  // Chebyshev check points
    /// Use the halved-domain program when the space is parity invariant.
    bool symmetric = true;
    /// Explicit support v_1..v_K; empty selects K equispaced points with endpoints.
    std::vector<double> support_points;
    ToleranceConfig tol = default_tolerances();

    static ToleranceConfig default_tolerances();
};

/// K equispaced points from -1 to 1 (K >= 2), or {0} for K = 1.
[[nodiscard]] std::vector<double> equispaced_points(int K);

/// Variables are A (M x K, column major), B (L x K, column major) and c.
[[nodiscard]] LinearProgram assemble_upper_general(const PolySpace &space, const UpperConfig &cfg);

/// Variables are A_e (M_e x K), A_o (M_o x K), B (L x K) and c, all column
/// major. `even` and `odd` are the shifted parity bases (columns may be empty).
[[nodiscard]] LinearProgram assemble_upper_symmetric(const ParitySplit &split, const ShiftedBasis &even,
                                                     const ShiftedBasis &odd, const UpperConfig &cfg);

struct UpperResult {
    BoundResult bound;
    /// Dual measures in the user's basis: row m holds the weights of mu_m at
    /// support[k]. In symmetric mode the support is unfolded to [-1, 1].
    Eigen::MatrixXd A;
    std::vector<double> support;
};

[[nodiscard]] UpperResult upper_bound(const PolySpace &space, const UpperConfig &cfg);

struct Atom {
    double location = 0.0;
    double weight = 0.0;
};

struct MeasureApprox {
    /// atoms[m]: atoms of mu_m above the relative threshold, by location.
    std::vector<std::vector<Atom>> atoms;
    Eigen::MatrixXd A;
    std::vector<double> support;
    /// max |A V - I| when a space was supplied, otherwise NaN.
    double duality_residual = 0.0;
};

[[nodiscard]] MeasureApprox extract_measures(const Eigen::MatrixXd &A, std::span<const double> support,
                                             double atom_threshold = kAtomThreshold);
[[nodiscard]] MeasureApprox extract_measures(const UpperResult &result, const PolySpace &space,
                                             double atom_threshold = kAtomThreshold);

}  // namespace projconst
