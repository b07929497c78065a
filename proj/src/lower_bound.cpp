#include "projconst/lower_bound.hpp"

#include "projconst/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

namespace projconst {

namespace {

using Triplets = std::vector<Eigen::Triplet<double, int>>;

void check(int degree, const LowerConfig &cfg) {
    if (cfg.S <= degree) {
        throw Error(ErrorCode::InvalidConfig, "moment order S = " + std::to_string(cfg.S) +
                                                  " must exceed the degree " + std::to_string(degree));
    }
    if (cfg.L < 1) throw Error(ErrorCode::InvalidConfig, "L must be positive");
    if (!cfg.grid_angles.empty() && static_cast<int>(cfg.grid_angles.size()) != cfg.L) {
        throw Error(ErrorCode::InvalidConfig, "grid has " + std::to_string(cfg.grid_angles.size()) +
                                                  " angles, L = " + std::to_string(cfg.L));
    }
}

std::vector<double> grid_points(const LowerConfig &cfg, bool symmetric) {
    const double top = symmetric ? std::numbers::pi / 2 : std::numbers::pi;
    std::vector<double> x;
    for (int l = 0; l < cfg.L; ++l) {
        const double theta = cfg.grid_angles.empty() ? top * (l + 0.5) / cfg.L : cfg.grid_angles[static_cast<std::size_t>(l)];
        if (!(theta >= 0.0 && theta <= top)) {
            throw Error(ErrorCode::InvalidConfig, "grid angle outside [0, " + std::string(symmetric ? "pi/2" : "pi") + "]");
        }
        x.push_back(std::cos(theta));
    }
    return x;
}

// Rows sum_{k<=d} U(k, m') y_{m,k} = delta_{m,m'} for one family of moment
// vectors; `sign` lists (first variable, coefficient) pairs combined per entry.
void duality_rows(const Eigen::MatrixXd &U, int S, const std::vector<std::pair<int, double>> &families,
                  Triplets &eq, std::vector<double> &rhs) {
    const int M = static_cast<int>(U.cols());
    for (int m = 0; m < M; ++m) {
        for (int mp = 0; mp < M; ++mp) {
            const int row = static_cast<int>(rhs.size());
            for (int k = 0; k < U.rows(); ++k) {
                if (U(k, mp) == 0.0) continue;
                for (const auto &[first, coef] : families) eq.emplace_back(row, first + m * S + k, coef * U(k, mp));
            }
            rhs.push_back(m == mp ? 1.0 : 0.0);
        }
    }
}

PsdBlock toeplitz_block(int S, int first, double coef = 1.0) {
    PsdBlock b;
    b.order = S;
    for (int k = 0; k < S; ++k) b.terms.push_back(PsdTerm::toeplitz(first + k, k, coef));
    return b;
}

void finish(ConicProgram &cp, int n, const Triplets &eq, const std::vector<double> &rhs, const Triplets &in,
            int in_rows) {
    cp.eq_matrix.resize(static_cast<Eigen::Index>(rhs.size()), n);
    cp.eq_matrix.setFromTriplets(eq.begin(), eq.end());
    cp.eq_rhs = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    cp.ineq_matrix.resize(in_rows, n);
    cp.ineq_matrix.setFromTriplets(in.begin(), in.end());
    cp.ineq_rhs = Eigen::VectorXd::Zero(in_rows);
}

Eigen::MatrixXd columns_or_empty(const std::optional<PolySpace> &s, Eigen::Index rows) {
    return s ? s->coefficients() : Eigen::MatrixXd(rows, 0);
}

}  // namespace

ToleranceConfig LowerConfig::default_tolerances() {
    ToleranceConfig t = ToleranceConfig::sdp_defaults();
    t.max_problem_size = 40000;
    return t;
}

ConicProgram assemble_lower_general(const PolySpace &space, const LowerConfig &cfg) {
    check(space.degree(), cfg);
    const int M = space.dim(), L = cfg.L, S = cfg.S;
    const Eigen::MatrixXd W = collocation(space, grid_points(cfg, false));
    const int yp = 0, ym = M * S, zp = 2 * M * S, zm = 2 * M * S + L * S, c = 2 * M * S + 2 * L * S;
    const int n = c + 1;

    ConicProgram cp;
    cp.objective = Eigen::VectorXd::Zero(n);
    cp.objective(c) = 1.0;
    Triplets eq;
    std::vector<double> rhs;
    duality_rows(space.coefficients(), S, {{yp, 1.0}, {ym, -1.0}}, eq, rhs);
    // W (Y+ - Y-) = Z+ - Z-, entry by entry in k.
    for (int l = 0; l < L; ++l) {
        for (int k = 0; k < S; ++k) {
            const int row = static_cast<int>(rhs.size());
            for (int m = 0; m < M; ++m) {
                if (W(l, m) == 0.0) continue;
                eq.emplace_back(row, yp + m * S + k, W(l, m));
                eq.emplace_back(row, ym + m * S + k, -W(l, m));
            }
            eq.emplace_back(row, zp + l * S + k, -1.0);
            eq.emplace_back(row, zm + l * S + k, 1.0);
            rhs.push_back(0.0);
        }
    }
    Triplets in;
    for (int l = 0; l < L; ++l) {
        in.emplace_back(l, zp + l * S, 1.0);
        in.emplace_back(l, zm + l * S, 1.0);
        in.emplace_back(l, c, -1.0);
    }
    finish(cp, n, eq, rhs, in, L);
    for (int m = 0; m < M; ++m) cp.psd_blocks.push_back(toeplitz_block(S, yp + m * S));
    for (int m = 0; m < M; ++m) cp.psd_blocks.push_back(toeplitz_block(S, ym + m * S));
    for (int l = 0; l < L; ++l) cp.psd_blocks.push_back(toeplitz_block(S, zp + l * S));
    for (int l = 0; l < L; ++l) cp.psd_blocks.push_back(toeplitz_block(S, zm + l * S));
    return cp;
}

ConicProgram assemble_lower_symmetric(const ParitySplit &split, const ShiftedBasis &even, const ShiftedBasis &odd,
                                      const LowerConfig &cfg) {
    check(split.degree, cfg);
    const int L = cfg.L, S = cfg.S;
    const std::vector<double> x = grid_points(cfg, true);

    struct Part {
        int first;
        Eigen::MatrixXd U;  // shifted coefficients
        Eigen::MatrixXd W;  // original part at the grid
    };
    std::vector<Part> parts;
    int n = 0;
    const std::optional<PolySpace> *spaces[] = {&split.even, &split.odd};
    const ShiftedBasis *shifted[] = {&even, &odd};
    for (int p = 0; p < 2; ++p) {
        if (!*spaces[p]) continue;
        if (shifted[p]->coefficients.cols() != (*spaces[p])->dim()) {
            throw Error(ErrorCode::DimensionMismatch, "shifted basis does not match the parity split");
        }
        parts.push_back({n, shifted[p]->coefficients, collocation(**spaces[p], x)});
        n += (*spaces[p])->dim() * S;
    }
    const int z = n;
    const int c = z + L * S;
    n = c + 1;

    ConicProgram cp;
    cp.objective = Eigen::VectorXd::Zero(n);
    cp.objective(c) = 1.0;
    Triplets eq;
    std::vector<double> rhs;
    for (const auto &part : parts) duality_rows(part.U, S, {{part.first, 1.0}}, eq, rhs);
    Triplets in;
    for (int l = 0; l < L; ++l) {
        in.emplace_back(l, z + l * S, 1.0);
        in.emplace_back(l, c, -1.0);
    }
    finish(cp, n, eq, rhs, in, L);
    // Toep(z_l) -+ Toep(sum_m W(l, m) y_m) PSD for each part and sign.
    for (int l = 0; l < L; ++l) {
        for (const auto &part : parts) {
            for (double sgn : {1.0, -1.0}) {
                PsdBlock b = toeplitz_block(S, z + l * S);
                for (int m = 0; m < part.W.cols(); ++m) {
                    const double w = part.W(l, m);
                    if (w == 0.0) continue;
                    for (int k = 0; k < S; ++k) b.terms.push_back(PsdTerm::toeplitz(part.first + m * S + k, k, -sgn * w));
                }
                cp.psd_blocks.push_back(std::move(b));
            }
        }
    }
    return cp;
}

LowerResult lower_bound(const PolySpace &space, const LowerConfig &cfg) {
    const auto start = std::chrono::steady_clock::now();
    const bool symmetric = cfg.symmetric && is_parity_invariant(space);
    ConicProgram cp;
    if (symmetric) {
        const ParitySplit split = parity_split(space);
        const Eigen::Index rows = space.coefficients().rows();
        cp = assemble_lower_symmetric(split, shift_basis(columns_or_empty(split.even, rows)),
                                      shift_basis(columns_or_empty(split.odd, rows)), cfg);
    } else {
        cp = assemble_lower_general(space, cfg);
    }
    const SdpSolution sol = solve_sdp(cp, cfg.tol);

    LowerResult out;
    BoundResult &br = out.bound;
    br.side = BoundSide::Lower;
    br.mode = symmetric ? ProgramMode::Symmetric : ProgramMode::General;
    br.S = cfg.S;
    br.L = cfg.L;
    br.rho = 1.0;
    br.solver = {sol.status,         sol.iterations,    sol.objective_value, sol.dual_objective,
                 sol.primal_residual, sol.dual_residual, sol.gap};
    if (sol.status != SolveStatus::Optimal) {
        throw Error(ErrorCode::NumericalFailure,
                    "lower-bound SDP ended with status " + std::string(to_string(sol.status)));
    }
    br.program_value = sol.objective_value;
    br.margin = 10.0 * cfg.tol.gap_tol * (1.0 + std::abs(sol.objective_value));
    br.value = std::min(sol.objective_value, sol.dual_objective) - br.margin;
    out.min_block_eigenvalue = sol.min_eigenvalue_per_block.empty()
                                   ? 0.0
                                   : *std::min_element(sol.min_eigenvalue_per_block.begin(),
                                                       sol.min_eigenvalue_per_block.end());
    br.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace projconst
