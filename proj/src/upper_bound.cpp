#include "projconst/upper_bound.hpp"

#include "projconst/chebyshev.hpp"
#include "projconst/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

namespace projconst {

namespace {

using Triplets = std::vector<Eigen::Triplet<double, int>>;

std::vector<double> support_of(const UpperConfig &cfg) {
    if (cfg.K < 1) throw Error(ErrorCode::InvalidGrid, "K must be positive");
    std::vector<double> v = cfg.support_points.empty() ? equispaced_points(cfg.K) : cfg.support_points;
    if (static_cast<int>(v.size()) != cfg.K) {
        throw Error(ErrorCode::InvalidGrid, "support has " + std::to_string(v.size()) + " points, K = " +
                                                std::to_string(cfg.K));
    }
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (!(sorted[i] >= -1.0 && sorted[i] <= 1.0)) throw Error(ErrorCode::InvalidGrid, "support point outside [-1, 1]");
        if (i && sorted[i] == sorted[i - 1]) throw Error(ErrorCode::InvalidGrid, "support points must be distinct");
    }
    return v;
}

// Rows |W_p A_p| <= B for every parity block p, then B 1 <= c.
struct Layout {
    int K = 0, L = 0;
    std::vector<int> dims;     // M per block
    std::vector<int> offsets;  // first A variable per block
    int b_offset = 0, c_index = 0, n = 0;

    Layout(std::vector<int> d, int K_, int L_) : K(K_), L(L_), dims(std::move(d)) {
        int off = 0;
        for (int m : dims) {
            offsets.push_back(off);
            off += m * K;
        }
        b_offset = off;
        c_index = off + L * K;
        n = c_index + 1;
    }
    int a(int block, int m, int k) const { return offsets[static_cast<std::size_t>(block)] + k * dims[static_cast<std::size_t>(block)] + m; }
    int b(int l, int k) const { return b_offset + k * L + l; }
};

LinearProgram build_lp(const Layout &lay, const std::vector<Eigen::MatrixXd> &V, const std::vector<Eigen::MatrixXd> &W) {
    LinearProgram lp;
    lp.objective = Eigen::VectorXd::Zero(lay.n);
    lp.objective(lay.c_index) = 1.0;

    Triplets eq;
    int m_eq = 0;
    for (std::size_t p = 0; p < lay.dims.size(); ++p) m_eq += lay.dims[p] * lay.dims[p];
    lp.eq_rhs = Eigen::VectorXd::Zero(m_eq);
    int row = 0;
    for (std::size_t p = 0; p < lay.dims.size(); ++p) {
        const int M = lay.dims[p];
        for (int m = 0; m < M; ++m) {
            for (int mp = 0; mp < M; ++mp, ++row) {
                for (int k = 0; k < lay.K; ++k) {
                    const double v = V[p](k, mp);
                    if (v != 0.0) eq.emplace_back(row, lay.a(static_cast<int>(p), m, k), v);
                }
                if (m == mp) lp.eq_rhs(row) = 1.0;
            }
        }
    }
    lp.eq_matrix.resize(m_eq, lay.n);
    lp.eq_matrix.setFromTriplets(eq.begin(), eq.end());

    Triplets in;
    row = 0;
    for (std::size_t p = 0; p < lay.dims.size(); ++p) {
        const int M = lay.dims[p];
        for (int k = 0; k < lay.K; ++k) {
            for (int l = 0; l < lay.L; ++l) {
                for (double sgn : {1.0, -1.0}) {
                    for (int m = 0; m < M; ++m) {
                        const double w = W[p](l, m);
                        if (w != 0.0) in.emplace_back(row, lay.a(static_cast<int>(p), m, k), sgn * w);
                    }
                    in.emplace_back(row++, lay.b(l, k), -1.0);
                }
            }
        }
    }
    for (int l = 0; l < lay.L; ++l, ++row) {
        for (int k = 0; k < lay.K; ++k) in.emplace_back(row, lay.b(l, k), 1.0);
        in.emplace_back(row, lay.c_index, -1.0);
    }
    lp.ineq_matrix.resize(row, lay.n);
    lp.ineq_matrix.setFromTriplets(in.begin(), in.end());
    lp.ineq_rhs = Eigen::VectorXd::Zero(row);
    return lp;
}

Eigen::MatrixXd block_of(const Layout &lay, const Eigen::VectorXd &x, int p) {
    const int M = lay.dims[static_cast<std::size_t>(p)];
    Eigen::MatrixXd A(M, lay.K);
    for (int k = 0; k < lay.K; ++k) {
        for (int m = 0; m < M; ++m) A(m, k) = x(lay.a(p, m, k));
    }
    return A;
}

Eigen::MatrixXd columns_or_empty(const std::optional<PolySpace> &s, Eigen::Index rows) {
    return s ? s->coefficients() : Eigen::MatrixXd(rows, 0);
}

SolverReport report_of(const LpSolution &s) {
    return {s.status, s.iterations, s.objective_value, s.dual_objective, s.primal_residual, s.dual_residual, s.gap};
}

}  // namespace

ToleranceConfig UpperConfig::default_tolerances() {
    ToleranceConfig t = ToleranceConfig::lp_defaults();
    t.max_problem_size = 20'000'000;
    return t;
}

std::vector<double> equispaced_points(int K) {
    if (K < 1) throw Error(ErrorCode::InvalidGrid, "K must be positive");
    if (K == 1) return {0.0};
    std::vector<double> v(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) v[static_cast<std::size_t>(k)] = -1.0 + 2.0 * k / (K - 1);
    return v;
}

LinearProgram assemble_upper_general(const PolySpace &space, const UpperConfig &cfg) {
    (void)oversampling_factor(space.degree(), cfg.L, false);
    const std::vector<double> v = support_of(cfg);
    const Layout lay({space.dim()}, cfg.K, cfg.L);
    return build_lp(lay, {collocation(space, v)}, {collocation(space, cheb_zeros(cfg.L))});
}

LinearProgram assemble_upper_symmetric(const ParitySplit &split, const ShiftedBasis &even, const ShiftedBasis &odd,
                                       const UpperConfig &cfg) {
    (void)oversampling_factor(split.degree, cfg.L, true);
    const std::vector<double> v = support_of(cfg);
    const std::vector<double> w = positive_cheb_zeros(cfg.L);
    std::vector<int> dims;
    std::vector<Eigen::MatrixXd> V, W;
    const std::optional<PolySpace> *parts[] = {&split.even, &split.odd};
    const ShiftedBasis *shifted[] = {&even, &odd};
    for (int p = 0; p < 2; ++p) {
        if (!*parts[p]) continue;
        if (shifted[p]->coefficients.cols() != (*parts[p])->dim()) {
            throw Error(ErrorCode::DimensionMismatch, "shifted basis does not match the parity split");
        }
        dims.push_back((*parts[p])->dim());
        V.push_back(collocation(shifted[p]->coefficients, v));
        W.push_back(collocation(**parts[p], w));
    }
    return build_lp(Layout(dims, cfg.K, cfg.L), V, W);
}

UpperResult upper_bound(const PolySpace &space, const UpperConfig &cfg) {
    const auto start = std::chrono::steady_clock::now();
    const int d = space.degree();
    const bool symmetric = cfg.symmetric && is_parity_invariant(space);
    const double rho = oversampling_factor(d, cfg.L, symmetric);
    const std::vector<double> v = support_of(cfg);

    UpperResult out;
    BoundResult &br = out.bound;
    br.side = BoundSide::Upper;
    br.mode = symmetric ? ProgramMode::Symmetric : ProgramMode::General;
    br.K = cfg.K;
    br.L = cfg.L;
    br.rho = rho;

    LinearProgram lp;
    std::optional<ParitySplit> split;
    std::vector<Eigen::MatrixXd> W;
    std::vector<int> dims;
    if (symmetric) {
        split = parity_split(space);
        const Eigen::Index rows = space.coefficients().rows();
        const ShiftedBasis se = shift_basis(columns_or_empty(split->even, rows));
        const ShiftedBasis so = shift_basis(columns_or_empty(split->odd, rows));
        lp = assemble_upper_symmetric(*split, se, so, cfg);
        const std::vector<double> w = positive_cheb_zeros(cfg.L);
        for (const auto *part : {&split->even, &split->odd}) {
            if (!*part) continue;
            dims.push_back((*part)->dim());
            W.push_back(collocation(**part, w));
        }
    } else {
        lp = assemble_upper_general(space, cfg);
        dims.push_back(space.dim());
        W.push_back(collocation(space, cheb_zeros(cfg.L)));
    }

    const LpSolution sol = solve_lp(lp, cfg.tol);
    br.solver = report_of(sol);
    if (sol.status != SolveStatus::Optimal) {
        throw Error(ErrorCode::NumericalFailure,
                    "upper-bound LP ended with status " + std::string(to_string(sol.status)));
    }

    // Objective recomputed from A so the bound does not rely on the slacks.
    const Layout lay(dims, cfg.K, cfg.L);
    std::vector<Eigen::MatrixXd> blocks;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(cfg.L, cfg.K);
    for (int p = 0; p < static_cast<int>(dims.size()); ++p) {
        blocks.push_back(block_of(lay, sol.x, p));
        B = B.cwiseMax((W[static_cast<std::size_t>(p)] * blocks.back()).cwiseAbs());
    }
    const double recomputed = B.rowwise().sum().maxCoeff();
    br.program_value = sol.objective_value;
    br.margin = cfg.tol.feas_tol;
    br.value = rho * std::max(sol.objective_value, recomputed) + br.margin;

    if (!symmetric) {
        out.A = blocks[0];
        out.support = v;
    } else {
        // Unfold the half-interval measures: weight a at t = v_k becomes a/2 at
        // x = (t + 1) / 2 and +-a/2 at -x; an even atom at x = 0 keeps a.
        std::map<double, int> index;
        for (double t : v) {
            const double x = 0.5 * (t + 1.0);
            index.emplace(x, 0);
            index.emplace(-x, 0);
        }
        int pos = 0;
        for (auto &kv : index) {
            kv.second = pos++;
            out.support.push_back(kv.first);
        }
        const int M = space.dim();
        Eigen::MatrixXd Asplit = Eigen::MatrixXd::Zero(M, pos);
        int row0 = 0;
        for (std::size_t p = 0; p < blocks.size(); ++p) {
            const bool even = split->even && p == 0;
            for (int m = 0; m < blocks[p].rows(); ++m) {
                for (int k = 0; k < cfg.K; ++k) {
                    const double a = blocks[p](m, k);
                    const double x = 0.5 * (v[static_cast<std::size_t>(k)] + 1.0);
                    if (x == 0.0) {
                        if (even) Asplit(row0 + m, index.at(0.0)) += a;
                        continue;
                    }
                    Asplit(row0 + m, index.at(x)) += 0.5 * a;
                    Asplit(row0 + m, index.at(-x)) += (even ? 0.5 : -0.5) * a;
                }
            }
            row0 += static_cast<int>(blocks[p].rows());
        }
        // Functionals of the user basis: u = s T gives eta_user = T^{-1} eta_split.
        out.A = split->to_split.partialPivLu().solve(Asplit);
    }

    br.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

MeasureApprox extract_measures(const Eigen::MatrixXd &A, std::span<const double> support, double atom_threshold) {
    if (A.cols() != static_cast<Eigen::Index>(support.size())) {
        throw Error(ErrorCode::DimensionMismatch, "measure matrix and support differ in size");
    }
    MeasureApprox out;
    out.A = A;
    out.support.assign(support.begin(), support.end());
    out.duality_residual = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::size_t> order(support.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });
    for (Eigen::Index m = 0; m < A.rows(); ++m) {
        const double cut = atom_threshold * A.row(m).cwiseAbs().maxCoeff();
        std::vector<Atom> atoms;
        for (std::size_t k : order) {
            const double w = A(m, static_cast<Eigen::Index>(k));
            if (std::abs(w) > cut) atoms.push_back({support[k], w});
        }
        out.atoms.push_back(std::move(atoms));
    }
    return out;
}

MeasureApprox extract_measures(const UpperResult &result, const PolySpace &space, double atom_threshold) {
    MeasureApprox out = extract_measures(result.A, result.support, atom_threshold);
    const Eigen::MatrixXd V = collocation(space, result.support);
    out.duality_residual =
        (result.A * V - Eigen::MatrixXd::Identity(space.dim(), space.dim())).cwiseAbs().maxCoeff();
    return out;
}

}  // namespace projconst
