#pragma once

#include "projconst/bound.hpp"
#include "projconst/sdp_solver.hpp"
#include "projconst/space.hpp"

#include <vector>

namespace projconst {

struct LowerConfig {
    int S = 0;  // moment truncation order, > degree
    int L = 0;  // grid angles
    /// Use the halved-domain program when the space is parity invariant.
    bool symmetric = true;
    /// Explicit angles; empty selects pi (l - 1/2) / L (general) or
    /// pi (l - 1/2) / (2L) (symmetric).
    std::vector<double> grid_angles;
    ToleranceConfig tol = default_tolerances();

    static ToleranceConfig default_tolerances();
};

/// Variables: Y+ (M x S), Y- (M x S), Z+ (L x S), Z- (L x S), each row major
/// by functional, then c.
[[nodiscard]] ConicProgram assemble_lower_general(const PolySpace &space, const LowerConfig &cfg);

/// Variables: Y_e (M_e x S), Y_o (M_o x S), Z (L x S), then c. `even` and
/// `odd` are the shifted parity bases.
[[nodiscard]] ConicProgram assemble_lower_symmetric(const ParitySplit &split, const ShiftedBasis &even,
                                                    const ShiftedBasis &odd, const LowerConfig &cfg);

struct LowerResult {
    BoundResult bound;
    /// Smallest eigenvalue over the Toeplitz blocks at the returned point.
    double min_block_eigenvalue = 0.0;
};

[[nodiscard]] LowerResult lower_bound(const PolySpace &space, const LowerConfig &cfg);

}  // namespace projconst
