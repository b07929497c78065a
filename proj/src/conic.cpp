#include "projconst/conic.hpp"

#include "projconst/errors.hpp"

#include "ldl.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace projconst {

std::string_view to_string(SolveStatus status) noexcept {
    switch (status) {
        case SolveStatus::Optimal: return "Optimal";
        case SolveStatus::Infeasible: return "Infeasible";
        case SolveStatus::Unbounded: return "Unbounded";
        case SolveStatus::IterLimit: return "IterLimit";
        case SolveStatus::NumericalFailure: return "NumericalFailure";
    }
    return "Unknown";
}

ToleranceConfig ToleranceConfig::lp_defaults() {
    ToleranceConfig t;
    t.feas_tol = 1e-9;
    t.gap_tol = 1e-9;
    t.max_problem_size = 200000;
    return t;
}

ToleranceConfig ToleranceConfig::sdp_defaults() {
    ToleranceConfig t;
    t.feas_tol = 1e-8;
    t.gap_tol = 1e-8;
    t.psd_tol = 1e-8;
    t.max_problem_size = 4000;
    return t;
}

namespace {

void add_terms(const std::vector<PsdTerm> &terms, const Eigen::VectorXd &x, Eigen::MatrixXd &out) {
    for (const auto &t : terms) {
        const double v = t.coef * x(t.var);
        if (v == 0.0) continue;
        if (t.kind == PsdTerm::Kind::Toeplitz) {
            if (t.i == 0) {
                out.diagonal().array() += v;
            } else {
                out.diagonal(t.i).array() += v;
                out.diagonal(-t.i).array() += v;
            }
        } else {
            out(t.i, t.j) += v;
            if (t.i != t.j) out(t.j, t.i) += v;
        }
    }
}

}  // namespace

Eigen::MatrixXd PsdBlock::evaluate(const Eigen::VectorXd &x) const {
    Eigen::MatrixXd out = constant.size() ? constant : Eigen::MatrixXd::Zero(order, order);
    add_terms(terms, x, out);
    return out;
}

void PsdBlock::adjoint_add(const Eigen::MatrixXd &Z, double scale, Eigen::VectorXd &out) const {
    for (const auto &t : terms) {
        double ip = 0.0;
        if (t.kind == PsdTerm::Kind::Toeplitz) {
            ip = t.i == 0 ? Z.trace() : Z.diagonal(t.i).sum() + Z.diagonal(-t.i).sum();
        } else {
            ip = t.i == t.j ? Z(t.i, t.j) : Z(t.i, t.j) + Z(t.j, t.i);
        }
        out(t.var) += scale * t.coef * ip;
    }
}

Eigen::MatrixXd toeplitz_matrix(const Eigen::Ref<const Eigen::VectorXd> &y, int order) {
    Eigen::MatrixXd T(order, order);
    for (int i = 0; i < order; ++i) {
        for (int j = 0; j < order; ++j) T(i, j) = y(std::abs(i - j));
    }
    return T;
}

Eigen::MatrixXd toeplitz_pairing(const Eigen::MatrixXd &Q) {
    const auto S = Q.rows();
    // C(a, b) = sum_{i,p} Q[i+a, p] Q[i, p+b] is the b-th diagonal sum of
    // X_a = Q[a:, :]' Q[:S-a, :]; Cn(a, b) = C(a, -b).
    Eigen::MatrixXd C(S, S);
    Eigen::MatrixXd Cn(S, S);
    Eigen::MatrixXd X(S, S);
    for (Eigen::Index a = 0; a < S; ++a) {
        X.noalias() = Q.bottomRows(S - a).transpose() * Q.topRows(S - a);
        for (Eigen::Index b = 0; b < S; ++b) {
            C(a, b) = X.diagonal(b).sum();
            Cn(a, b) = X.diagonal(-b).sum();
        }
    }
    Eigen::MatrixXd T(S, S);
    for (Eigen::Index a = 0; a < S; ++a) {
        for (Eigen::Index b = 0; b < S; ++b) {
            if (a == 0 && b == 0) {
                T(a, b) = C(0, 0);
            } else if (a == 0 || b == 0) {
                T(a, b) = 2.0 * C(a, b);
            } else {
                T(a, b) = 2.0 * (C(a, b) + Cn(a, b));
            }
        }
    }
    return T;
}

namespace conic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStepFraction = 0.99;
constexpr double kRegularization = 1e-9;
constexpr double kMaxRegularization = 1e-5;
constexpr double kPivotEps = 1e-13;
constexpr double kPivotDelta = 2e-7;
constexpr int kRefinementSteps = 8;
constexpr double kMaxKktResidual = 1e-6;

// Element of the product cone: nonnegative orthant plus PSD blocks.
struct ConeVec {
    Eigen::VectorXd lp;
    std::vector<Eigen::MatrixXd> psd;
};

double dot(const ConeVec &a, const ConeVec &b) {
    double s = a.lp.dot(b.lp);
    for (std::size_t j = 0; j < a.psd.size(); ++j) s += a.psd[j].cwiseProduct(b.psd[j]).sum();
    return s;
}

void axpy(double alpha, const ConeVec &x, ConeVec &y) {
    y.lp += alpha * x.lp;
    for (std::size_t j = 0; j < x.psd.size(); ++j) y.psd[j] += alpha * x.psd[j];
}

ConeVec scaled(double alpha, const ConeVec &x) {
    ConeVec out = x;
    out.lp *= alpha;
    for (auto &m : out.psd) m *= alpha;
    return out;
}

double inf_norm(const ConeVec &v) {
    double m = v.lp.size() ? v.lp.lpNorm<Eigen::Infinity>() : 0.0;
    for (const auto &b : v.psd) m = std::max(m, b.lpNorm<Eigen::Infinity>());
    return m;
}

double inf_norm(const Eigen::VectorXd &v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

bool all_finite(const ConeVec &v) {
    if (!v.lp.allFinite()) return false;
    for (const auto &b : v.psd) {
        if (!b.allFinite()) return false;
    }
    return true;
}

struct BlockInfo {
    int order = 0;
    std::vector<int> vars;       // distinct variables, ascending
    std::vector<int> term_local;  // local index of each term's variable
    bool toeplitz_only = true;
    Eigen::MatrixXd offset_coef;  // order x nvars, Toeplitz fast path
    Eigen::MatrixXd constant;     // order x order
    std::vector<int> positions;   // packed lower triangle (u >= v) -> K value index
};

// Nesterov-Todd scaling of a PSD pair: s = R diag(lambda) R', z = R^{-T} diag(lambda) R^{-1}.
struct BlockScaling {
    Eigen::MatrixXd R;
    Eigen::MatrixXd Rinv;
    Eigen::MatrixXd Q;  // (R R')^{-1}
    Eigen::VectorXd lambda;
};

bool nt_scaling(const Eigen::MatrixXd &s, const Eigen::MatrixXd &z, BlockScaling &out) {
    Eigen::LLT<Eigen::MatrixXd> c1(s);
    Eigen::LLT<Eigen::MatrixXd> c2(z);
    if (c1.info() != Eigen::Success || c2.info() != Eigen::Success) return false;
    const Eigen::MatrixXd L1 = c1.matrixL();
    const Eigen::MatrixXd L2 = c2.matrixL();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(L2.transpose() * L1, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd sig = svd.singularValues();
    if (!(sig.minCoeff() > 0.0) || !sig.allFinite()) return false;
    const Eigen::VectorXd isq = sig.array().rsqrt();
    out.R = L1 * svd.matrixV() * isq.asDiagonal();
    out.Rinv = isq.asDiagonal() * svd.matrixU().transpose() * L2.transpose();
    out.lambda = sig;
    return true;
}

// Direction with the cone part of z kept in scaled coordinates (W dz).
struct Direction {
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    ConeVec zs;
};

class Solver {
public:
    Solver(const Problem &p, const ToleranceConfig &tol) : P_(p), tol_(tol) {
        n_ = static_cast<int>(p.c.size());
        m_eq_ = static_cast<int>(p.A.rows());
        m_lp_ = static_cast<int>(p.G.rows());
        if (p.A.cols() != n_ && m_eq_ > 0) throw Error(ErrorCode::DimensionMismatch, "A has wrong column count");
        if (p.G.cols() != n_ && m_lp_ > 0) throw Error(ErrorCode::DimensionMismatch, "G has wrong column count");
        if (p.b.size() != m_eq_ || p.h.size() != m_lp_) {
            throw Error(ErrorCode::DimensionMismatch, "right-hand side size mismatch");
        }
        At_ = p.A.transpose();
        Gt_ = p.G.transpose();
        nu_ = m_lp_;
        for (const auto &blk : p.psd) nu_ += blk.order;
        prepare_blocks();
        build_pattern();
        max_iter_ = tol.max_iterations > 0
                        ? tol.max_iterations
                        : static_cast<int>(std::min<long long>(
                              kIterationCap, 50LL * (static_cast<long long>(m_eq_) + m_lp_ + n_)));
    }

    Solution run();

private:
    const Problem &P_;
    ToleranceConfig tol_;
    int n_ = 0, m_eq_ = 0, m_lp_ = 0, nu_ = 0, max_iter_ = 0;
    SparseMatrix At_, Gt_;
    std::vector<BlockInfo> blocks_;

    SparseMatrix K_;
    std::vector<int> xx_positions_;
    std::vector<int> diag_positions_;
    detail::QuasiDefiniteLdl ldl_;
    std::vector<signed char> pivot_sign_;
    bool analyzed_ = false;
    double reg_ = kRegularization;
    std::vector<double> xdiag_;

    // Iterate. The orthant part is stored directly, PSD parts through their scaling.
    Eigen::VectorXd x_, y_;
    Eigen::VectorXd s_lp_, z_lp_;
    Eigen::VectorXd w_lp_, lambda_lp_;
    std::vector<BlockScaling> scal_;
    double tau_ = 1.0, kappa_ = 1.0;

    void prepare_blocks();
    void build_pattern();
    int position(int row, int col) const;

    ConeVec G_apply(const Eigen::VectorXd &x) const;
    Eigen::VectorXd GT_apply(const ConeVec &z) const;
    ConeVec zero_cone() const;
    ConeVec h_cone() const;
    ConeVec identity_cone() const;

    void set_identity_scaling();
    void refresh_lp_scaling();
    ConeVec current_s() const;
    ConeVec current_z() const;
    bool factor();
    bool refactor(double reg);
    double refine(const Eigen::VectorXd &rhs, Eigen::VectorXd &sol) const;
    Direction solve_kkt(const Eigen::VectorXd &rx, const Eigen::VectorXd &ry, const ConeVec &rz,
                        const ConeVec *extra);

    ConeVec lambda_cone() const;
    ConeVec lambda_div(const ConeVec &d) const;
    ConeVec jordan(const ConeVec &a, const ConeVec &b) const;
    double max_cone_step(const ConeVec &ds_scaled, const ConeVec &dz_scaled) const;
    ConeVec bring_to_cone(const ConeVec &r) const;
};

void Solver::prepare_blocks() {
    blocks_.reserve(P_.psd.size());
    for (const auto &blk : P_.psd) {
        BlockInfo info;
        info.order = blk.order;
        for (const auto &t : blk.terms) {
            if (t.var < 0 || t.var >= n_) throw Error(ErrorCode::DimensionMismatch, "PSD term variable out of range");
            if (t.kind == PsdTerm::Kind::Toeplitz) {
                if (t.i < 0 || t.i >= blk.order) throw Error(ErrorCode::DimensionMismatch, "Toeplitz offset out of range");
            } else {
                info.toeplitz_only = false;
                if (t.i < 0 || t.j < 0 || t.i >= blk.order || t.j >= blk.order) {
                    throw Error(ErrorCode::DimensionMismatch, "PSD entry out of range");
                }
            }
            info.vars.push_back(t.var);
        }
        std::sort(info.vars.begin(), info.vars.end());
        info.vars.erase(std::unique(info.vars.begin(), info.vars.end()), info.vars.end());
        for (const auto &t : blk.terms) {
            info.term_local.push_back(
                static_cast<int>(std::lower_bound(info.vars.begin(), info.vars.end(), t.var) - info.vars.begin()));
        }
        const auto nv = static_cast<Eigen::Index>(info.vars.size());
        if (info.toeplitz_only) {
            info.offset_coef = Eigen::MatrixXd::Zero(blk.order, nv);
            for (std::size_t k = 0; k < blk.terms.size(); ++k) {
                info.offset_coef(blk.terms[k].i, info.term_local[k]) += blk.terms[k].coef;
            }
        }
        if (blk.constant.size()) {
            if (blk.constant.rows() != blk.order || blk.constant.cols() != blk.order) {
                throw Error(ErrorCode::DimensionMismatch, "PSD constant has wrong shape");
            }
            info.constant = 0.5 * (blk.constant + blk.constant.transpose());
        } else {
            info.constant = Eigen::MatrixXd::Zero(blk.order, blk.order);
        }
        blocks_.push_back(std::move(info));
    }
}

void Solver::build_pattern() {
    const int N = n_ + m_eq_ + m_lp_;
    std::vector<Eigen::Triplet<double, int>> trip;
    for (int i = 0; i < N; ++i) trip.emplace_back(i, i, 0.0);
    for (const auto &info : blocks_) {
        for (std::size_t u = 0; u < info.vars.size(); ++u) {
            for (std::size_t v = 0; v < u; ++v) trip.emplace_back(info.vars[u], info.vars[v], 0.0);
        }
    }
    for (int col = 0; col < P_.A.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(P_.A, col); it; ++it) trip.emplace_back(n_ + it.row(), col, 0.0);
    }
    for (int col = 0; col < P_.G.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(P_.G, col); it; ++it) {
            trip.emplace_back(n_ + m_eq_ + it.row(), col, 0.0);
        }
    }
    K_.resize(N, N);
    K_.setFromTriplets(trip.begin(), trip.end());
    K_.makeCompressed();

    // Constant entries.
    for (int col = 0; col < P_.A.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(P_.A, col); it; ++it) {
            K_.valuePtr()[position(n_ + it.row(), col)] += it.value();
        }
    }
    for (int col = 0; col < P_.G.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(P_.G, col); it; ++it) {
            K_.valuePtr()[position(n_ + m_eq_ + it.row(), col)] += it.value();
        }
    }
    diag_positions_.resize(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) diag_positions_[static_cast<std::size_t>(i)] = position(i, i);
    for (int col = 0; col < n_; ++col) {
        for (int k = K_.outerIndexPtr()[col]; k < K_.outerIndexPtr()[col + 1]; ++k) {
            if (K_.innerIndexPtr()[k] < n_) xx_positions_.push_back(k);
        }
    }
    for (auto &info : blocks_) {
        const std::size_t nv = info.vars.size();
        info.positions.resize(nv * (nv + 1) / 2);
        for (std::size_t u = 0; u < nv; ++u) {
            for (std::size_t v = 0; v <= u; ++v) {
                info.positions[u * (u + 1) / 2 + v] = position(info.vars[u], info.vars[v]);
            }
        }
    }
}

int Solver::position(int row, int col) const {
    const int *begin = K_.innerIndexPtr() + K_.outerIndexPtr()[col];
    const int *end = K_.innerIndexPtr() + K_.outerIndexPtr()[col + 1];
    const int *it = std::lower_bound(begin, end, row);
    return static_cast<int>(it - K_.innerIndexPtr());
}

ConeVec Solver::zero_cone() const {
    ConeVec v;
    v.lp = Eigen::VectorXd::Zero(m_lp_);
    for (const auto &info : blocks_) v.psd.push_back(Eigen::MatrixXd::Zero(info.order, info.order));
    return v;
}

ConeVec Solver::identity_cone() const {
    ConeVec v;
    v.lp = Eigen::VectorXd::Ones(m_lp_);
    for (const auto &info : blocks_) v.psd.push_back(Eigen::MatrixXd::Identity(info.order, info.order));
    return v;
}

ConeVec Solver::h_cone() const {
    ConeVec v;
    v.lp = P_.h;
    for (const auto &info : blocks_) v.psd.push_back(info.constant);
    return v;
}

// PSD rows are written G_p x + s = h with G_p x = -(sum x_i F_i), h = F_0.
ConeVec Solver::G_apply(const Eigen::VectorXd &x) const {
    ConeVec out;
    out.lp = m_lp_ ? Eigen::VectorXd(P_.G * x) : Eigen::VectorXd::Zero(0);
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(blocks_[j].order, blocks_[j].order);
        add_terms(P_.psd[j].terms, x, m);
        out.psd.push_back(-m);
    }
    return out;
}

Eigen::VectorXd Solver::GT_apply(const ConeVec &z) const {
    Eigen::VectorXd out = m_lp_ ? Eigen::VectorXd(Gt_ * z.lp) : Eigen::VectorXd::Zero(n_);
    if (out.size() != n_) out = Eigen::VectorXd::Zero(n_);
    for (std::size_t j = 0; j < blocks_.size(); ++j) P_.psd[j].adjoint_add(z.psd[j], -1.0, out);
    return out;
}

void Solver::set_identity_scaling() {
    w_lp_ = Eigen::VectorXd::Ones(m_lp_);
    lambda_lp_ = Eigen::VectorXd::Ones(m_lp_);
    scal_.clear();
    for (const auto &info : blocks_) {
        const auto I = Eigen::MatrixXd::Identity(info.order, info.order);
        scal_.push_back({I, I, I, Eigen::VectorXd::Ones(info.order)});
    }
}

void Solver::refresh_lp_scaling() {
    w_lp_ = (s_lp_.array() / z_lp_.array()).sqrt();
    lambda_lp_ = (s_lp_.array() * z_lp_.array()).sqrt();
}

ConeVec Solver::current_s() const {
    ConeVec v;
    v.lp = s_lp_;
    for (const auto &sc : scal_) {
        Eigen::MatrixXd m = sc.R * sc.lambda.asDiagonal() * sc.R.transpose();
        v.psd.push_back(0.5 * (m + m.transpose()));
    }
    return v;
}

ConeVec Solver::current_z() const {
    ConeVec v;
    v.lp = z_lp_;
    for (const auto &sc : scal_) {
        Eigen::MatrixXd m = sc.Rinv.transpose() * sc.lambda.asDiagonal() * sc.Rinv;
        v.psd.push_back(0.5 * (m + m.transpose()));
    }
    return v;
}

bool Solver::factor() {
    double *val = K_.valuePtr();
    for (int k : xx_positions_) val[k] = 0.0;
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
        const auto &info = blocks_[j];
        const auto &Q = scal_[j].Q;
        const auto nv = static_cast<Eigen::Index>(info.vars.size());
        Eigen::MatrixXd H;
        if (info.toeplitz_only) {
            const Eigen::MatrixXd T = toeplitz_pairing(Q);
            H = info.offset_coef.transpose() * (T * info.offset_coef);
        } else {
            std::vector<Eigen::MatrixXd> F(static_cast<std::size_t>(nv),
                                           Eigen::MatrixXd::Zero(info.order, info.order));
            const auto &terms = P_.psd[j].terms;
            for (std::size_t k = 0; k < terms.size(); ++k) {
                auto &Fm = F[static_cast<std::size_t>(info.term_local[k])];
                const auto &t = terms[k];
                if (t.kind == PsdTerm::Kind::Toeplitz) {
                    if (t.i == 0) {
                        Fm.diagonal().array() += t.coef;
                    } else {
                        Fm.diagonal(t.i).array() += t.coef;
                        Fm.diagonal(-t.i).array() += t.coef;
                    }
                } else {
                    Fm(t.i, t.j) += t.coef;
                    if (t.i != t.j) Fm(t.j, t.i) += t.coef;
                }
            }
            H.resize(nv, nv);
            for (Eigen::Index v = 0; v < nv; ++v) {
                const Eigen::MatrixXd PQ = Q * F[static_cast<std::size_t>(v)] * Q;
                for (Eigen::Index u = v; u < nv; ++u) {
                    H(u, v) = F[static_cast<std::size_t>(u)].cwiseProduct(PQ).sum();
                }
            }
        }
        for (Eigen::Index u = 0; u < nv; ++u) {
            for (Eigen::Index v = 0; v <= u; ++v) {
                val[info.positions[static_cast<std::size_t>(u * (u + 1) / 2 + v)]] += H(u, v);
            }
        }
    }
    if (!analyzed_) {
        ldl_.analyze(K_);
        pivot_sign_.assign(static_cast<std::size_t>(K_.rows()), -1);
        std::fill(pivot_sign_.begin(), pivot_sign_.begin() + n_, 1);
        analyzed_ = true;
    }
    if (!std::all_of(K_.valuePtr(), K_.valuePtr() + K_.nonZeros(), [](double v) { return std::isfinite(v); })) {
        return false;
    }
    xdiag_.resize(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) xdiag_[static_cast<std::size_t>(i)] = val[diag_positions_[static_cast<std::size_t>(i)]];
    return refactor(kRegularization);
}

// Static regularization, raised until the factorization is finite.
bool Solver::refactor(double reg) {
    double *val = K_.valuePtr();
    for (reg_ = reg; reg_ <= kMaxRegularization; reg_ *= 100.0) {
        for (int i = 0; i < n_; ++i) {
            val[diag_positions_[static_cast<std::size_t>(i)]] = xdiag_[static_cast<std::size_t>(i)] + reg_;
        }
        for (int i = 0; i < m_eq_; ++i) val[diag_positions_[static_cast<std::size_t>(n_ + i)]] = -reg_;
        for (int i = 0; i < m_lp_; ++i) {
            val[diag_positions_[static_cast<std::size_t>(n_ + m_eq_ + i)]] = -(w_lp_(i) * w_lp_(i)) - reg_;
        }
        if (ldl_.factorize(K_, pivot_sign_, kPivotEps, kPivotDelta) >= 0) return true;
    }
    return false;
}

// Iterative refinement against the unregularized system; stops once it
// stalls. Returns the final residual norm.
double Solver::refine(const Eigen::VectorXd &rhs, Eigen::VectorXd &sol) const {
    const int N = static_cast<int>(rhs.size());
    Eigen::VectorXd reg(N);
    reg.head(n_).setConstant(reg_);
    reg.segment(n_, m_eq_).setConstant(-reg_);
    reg.tail(m_lp_).setConstant(-reg_);
    auto residual = [&](const Eigen::VectorXd &v) {
        Eigen::VectorXd Kv = K_.selfadjointView<Eigen::Lower>() * v;
        Kv -= reg.cwiseProduct(v);
        return Eigen::VectorXd(rhs - Kv);
    };
    const double rhs_norm = std::max(1.0, inf_norm(rhs));
    Eigen::VectorXd err = residual(sol);
    double err_norm = inf_norm(err);
    for (int it = 0; it < kRefinementSteps && err_norm > 1e-14 * rhs_norm; ++it) {
        ldl_.solve_in_place(err);
        Eigen::VectorXd trial = sol + err;
        Eigen::VectorXd trial_err = residual(trial);
        const double trial_norm = inf_norm(trial_err);
        if (!(trial_norm < err_norm)) break;
        sol = std::move(trial);
        err = std::move(trial_err);
        err_norm = trial_norm;
    }
    return std::isfinite(err_norm) ? err_norm : std::numeric_limits<double>::infinity();
}

// Solves [0 A' G'; A 0 0; G 0 -W'W] (dx, dy, dz) = (rx, ry, rz - W' extra) and
// returns dz in scaled coordinates W dz.
Direction Solver::solve_kkt(const Eigen::VectorXd &rx, const Eigen::VectorXd &ry, const ConeVec &rz,
                            const ConeVec *extra) {
    // PSD rows are eliminated: dz_p = Q (G_p dx - r_p) Q with
    // Q r_p Q = Q rz_p Q - R^{-T} extra_p R^{-1}.
    Eigen::VectorXd rhs_x = rx;
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
        const auto &sc = scal_[j];
        Eigen::MatrixXd t = sc.Q * rz.psd[j] * sc.Q;
        if (extra) t -= sc.Rinv.transpose() * extra->psd[j] * sc.Rinv;
        P_.psd[j].adjoint_add(t, -1.0, rhs_x);
    }
    Eigen::VectorXd r3 = rz.lp;
    if (extra) r3 -= w_lp_.cwiseProduct(extra->lp);

    const int N = n_ + m_eq_ + m_lp_;
    Eigen::VectorXd rhs(N);
    rhs << rhs_x, ry, r3;

    const double rhs_norm = std::max(1.0, inf_norm(rhs));
    Eigen::VectorXd sol;
    // A factorization that is finite but too inaccurate (pivot growth) is
    // retried with a larger static regularization.
    for (;;) {
        sol = rhs;
        ldl_.solve_in_place(sol);
        double err_norm = std::numeric_limits<double>::infinity();
        if (sol.allFinite()) err_norm = refine(rhs, sol);
        if (err_norm <= kMaxKktResidual * rhs_norm) break;
        if (!(reg_ * 100.0 <= kMaxRegularization && refactor(reg_ * 100.0))) break;
    }
    Direction d;
    d.x = sol.head(n_);
    d.y = sol.segment(n_, m_eq_);
    d.zs.lp = w_lp_.cwiseProduct(sol.tail(m_lp_));
    const ConeVec Gdx = G_apply(d.x);
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
        const auto &sc = scal_[j];
        Eigen::MatrixXd m = sc.Rinv * (Gdx.psd[j] - rz.psd[j]) * sc.Rinv.transpose();
        if (extra) m += extra->psd[j];
        d.zs.psd.push_back(0.5 * (m + m.transpose()));
    }
    return d;
}

ConeVec Solver::lambda_cone() const {
    ConeVec out;
    out.lp = lambda_lp_;
    for (const auto &sc : scal_) out.psd.push_back(sc.lambda.asDiagonal());
    return out;
}

ConeVec Solver::lambda_div(const ConeVec &d) const {
    ConeVec out;
    out.lp = d.lp.cwiseQuotient(lambda_lp_);
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
        const auto &l = scal_[j].lambda;
        Eigen::MatrixXd u(d.psd[j].rows(), d.psd[j].cols());
        for (Eigen::Index c = 0; c < u.cols(); ++c) {
            for (Eigen::Index r = 0; r < u.rows(); ++r) u(r, c) = 2.0 * d.psd[j](r, c) / (l(r) + l(c));
        }
        out.psd.push_back(std::move(u));
    }
    return out;
}

ConeVec Solver::jordan(const ConeVec &a, const ConeVec &b) const {
    ConeVec out;
    out.lp = a.lp.cwiseProduct(b.lp);
    for (std::size_t j = 0; j < a.psd.size(); ++j) {
        Eigen::MatrixXd p = a.psd[j] * b.psd[j];
        out.psd.push_back(0.5 * (p + p.transpose()));
    }
    return out;
}

double Solver::max_cone_step(const ConeVec &ds, const ConeVec &dz) const {
    double alpha = kInf;
    for (int i = 0; i < m_lp_; ++i) {
        if (ds.lp(i) < 0.0) alpha = std::min(alpha, -lambda_lp_(i) / ds.lp(i));
        if (dz.lp(i) < 0.0) alpha = std::min(alpha, -lambda_lp_(i) / dz.lp(i));
    }
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
        const Eigen::VectorXd isq = scal_[j].lambda.array().rsqrt();
        for (const auto *D : {&ds.psd[j], &dz.psd[j]}) {
            const Eigen::MatrixXd M = isq.asDiagonal() * (*D) * isq.asDiagonal();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
            const double e = es.eigenvalues()(0);
            if (e < 0.0) alpha = std::min(alpha, -1.0 / e);
        }
    }
    return alpha;
}

ConeVec Solver::bring_to_cone(const ConeVec &r) const {
    double alpha = -0.99;
    for (int i = 0; i < m_lp_; ++i) alpha = std::max(alpha, -r.lp(i));
    for (const auto &b : r.psd) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (b + b.transpose()), Eigen::EigenvaluesOnly);
        alpha = std::max(alpha, -es.eigenvalues()(0));
    }
    ConeVec out = r;
    out.lp.array() += 1.0 + alpha;
    for (auto &b : out.psd) {
        b = 0.5 * (b + b.transpose());
        b.diagonal().array() += 1.0 + alpha;
    }
    return out;
}

Solution Solver::run() {
    Solution sol;
    const Eigen::VectorXd &c = P_.c;
    const Eigen::VectorXd &b = P_.b;
    const ConeVec h = h_cone();
    const double c_norm = inf_norm(c);
    const double bh_norm = std::max(inf_norm(b), inf_norm(h));

    auto zero_duals = [&] {
        sol.y = Eigen::VectorXd::Zero(m_eq_);
        sol.z = Eigen::VectorXd::Zero(m_lp_);
        sol.Z.clear();
        for (const auto &info : blocks_) sol.Z.push_back(Eigen::MatrixXd::Zero(info.order, info.order));
    };

    // Trivially decidable structure: empty equality rows and empty columns.
    {
        std::vector<int> row_nnz(static_cast<std::size_t>(m_eq_), 0);
        for (int col = 0; col < P_.A.outerSize(); ++col) {
            for (SparseMatrix::InnerIterator it(P_.A, col); it; ++it) {
                if (it.value() != 0.0) ++row_nnz[static_cast<std::size_t>(it.row())];
            }
        }
        for (int i = 0; i < m_eq_; ++i) {
            if (row_nnz[static_cast<std::size_t>(i)] == 0 && std::abs(b(i)) > tol_.feas_tol) {
                sol.status = SolveStatus::Infeasible;
                sol.x = Eigen::VectorXd::Zero(n_);
                zero_duals();
                sol.y(i) = b(i) > 0 ? -1.0 / b(i) : -1.0 / b(i);
                sol.primal_objective = kInf;
                sol.dual_objective = kInf;
                return sol;
            }
        }
        std::vector<char> used(static_cast<std::size_t>(n_), 0);
        for (const SparseMatrix *M : {&P_.A, &P_.G}) {
            if (M->cols() != n_) continue;
            for (int col = 0; col < n_; ++col) {
                if (M->col(col).nonZeros() > 0) used[static_cast<std::size_t>(col)] = 1;
            }
        }
        for (const auto &info : blocks_) {
            for (int v : info.vars) used[static_cast<std::size_t>(v)] = 1;
        }
        for (int col = 0; col < n_; ++col) {
            if (!used[static_cast<std::size_t>(col)] && c(col) != 0.0) {
                sol.status = SolveStatus::Unbounded;
                sol.x = Eigen::VectorXd::Zero(n_);
                sol.x(col) = -1.0 / c(col);
                zero_duals();
                sol.primal_objective = -kInf;
                sol.dual_objective = -kInf;
                return sol;
            }
        }
    }

    // Initial point from two solves with identity scaling.
    set_identity_scaling();
    if (!factor()) {
        sol.status = SolveStatus::NumericalFailure;
        return sol;
    }
    {
        const Direction p0 = solve_kkt(Eigen::VectorXd::Zero(n_), b, h, nullptr);
        x_ = p0.x;
        const ConeVec s0 = bring_to_cone(scaled(-1.0, p0.zs));
        const Direction d0 = solve_kkt(-c, Eigen::VectorXd::Zero(m_eq_), zero_cone(), nullptr);
        y_ = d0.y;
        const ConeVec z0 = bring_to_cone(d0.zs);
        s_lp_ = s0.lp;
        z_lp_ = z0.lp;
        for (std::size_t j = 0; j < blocks_.size(); ++j) {
            if (!nt_scaling(s0.psd[j], z0.psd[j], scal_[j])) {
                sol.status = SolveStatus::NumericalFailure;
                return sol;
            }
            scal_[j].Q = scal_[j].Rinv.transpose() * scal_[j].Rinv;
        }
        tau_ = 1.0;
        kappa_ = 1.0;
    }

    struct Best {
        double score = kInf;
        Eigen::VectorXd x, y;
        ConeVec s, z;
        double tau = 1.0;
    } best;

    const ConeVec e = identity_cone();
    SolveStatus status = SolveStatus::IterLimit;
    ConeVec S, Z;
    int iter = 0;
    for (;; ++iter) {
        refresh_lp_scaling();
        S = current_s();
        Z = current_z();

        // Residuals of the homogeneous embedding.
        const ConeVec Gx = G_apply(x_);
        const Eigen::VectorXd GTz = GT_apply(Z);
        const Eigen::VectorXd ATy = m_eq_ ? Eigen::VectorXd(At_ * y_) : Eigen::VectorXd::Zero(n_);
        const Eigen::VectorXd Ax = m_eq_ ? Eigen::VectorXd(P_.A * x_) : Eigen::VectorXd::Zero(0);
        const Eigen::VectorXd rx = ATy + GTz + c * tau_;
        const Eigen::VectorXd ry = Ax - b * tau_;
        ConeVec rz = S;
        axpy(1.0, Gx, rz);
        axpy(-tau_, h, rz);
        const double cx = c.dot(x_);
        const double by = b.dot(y_);
        const double hz = dot(h, Z);
        const double rtau = kappa_ + cx + by + hz;
        const ConeVec lam = lambda_cone();
        const double sz = dot(lam, lam);
        const double mu = (sz + tau_ * kappa_) / (nu_ + 1);

        const double pcost = cx / tau_;
        const double dcost = -(by + hz) / tau_;
        const Eigen::VectorXd ry_plain = Ax / tau_ - b;
        ConeVec rz_plain = scaled(1.0 / tau_, rz);
        const double pres = std::max(inf_norm(ry_plain), inf_norm(rz_plain)) / (1.0 + bh_norm);
        const double dres = inf_norm(Eigen::VectorXd(rx / tau_)) / (1.0 + c_norm);
        const double gap = sz / (tau_ * tau_);
        const double denom_gap = 1.0 + std::min(std::abs(pcost), std::abs(dcost));
        const double rel_gap = std::abs(pcost - dcost) / denom_gap;
        const double rel_gap2 = gap / denom_gap;

        if (tol_.verbose) {
            std::fprintf(stderr,
                         "%3d  pcost %+.10e  dcost %+.10e  pres %.2e  dres %.2e  gap %.2e/%.2e  tau %.2e  kap %.2e\n",
                         iter, pcost, dcost, pres, dres, rel_gap, rel_gap2, tau_, kappa_);
        }

        if (!std::isfinite(pcost) || !std::isfinite(dcost) || !all_finite(S) || !all_finite(Z)) {
            status = SolveStatus::NumericalFailure;
            break;
        }

        const double score = std::max({pres / tol_.feas_tol, dres / tol_.feas_tol, rel_gap / tol_.gap_tol,
                                       rel_gap2 / tol_.gap_tol});
        if (score < best.score) best = {score, x_, y_, S, Z, tau_};
        if (pres <= tol_.feas_tol && dres <= tol_.feas_tol && rel_gap <= tol_.gap_tol && rel_gap2 <= tol_.gap_tol) {
            status = SolveStatus::Optimal;
            break;
        }

        // Certificates of infeasibility.
        if (by + hz < 0.0) {
            const double scale = -(by + hz);
            const double infres = inf_norm(Eigen::VectorXd(ATy + GTz)) / scale;
            if (infres * std::max(1.0, c_norm) <= tol_.feas_tol && kappa_ > tau_) {
                sol.status = SolveStatus::Infeasible;
                sol.iterations = iter;
                sol.x = Eigen::VectorXd::Zero(n_);
                sol.y = y_ / scale;
                sol.z = Z.lp / scale;
                for (const auto &m : Z.psd) sol.Z.push_back(m / scale);
                sol.primal_objective = kInf;
                sol.dual_objective = kInf;
                return sol;
            }
        }
        if (cx < 0.0) {
            const double scale = -cx;
            ConeVec gs = Gx;
            axpy(1.0, S, gs);
            const double infres = std::max(inf_norm(Ax), inf_norm(gs)) / scale;
            if (infres * std::max(1.0, bh_norm) <= tol_.feas_tol && kappa_ > tau_) {
                sol.status = SolveStatus::Unbounded;
                sol.iterations = iter;
                sol.x = x_ / scale;
                zero_duals();
                sol.primal_objective = -kInf;
                sol.dual_objective = -kInf;
                return sol;
            }
        }

        if (iter >= max_iter_) {
            status = SolveStatus::IterLimit;
            break;
        }
        if (!factor()) {
            status = SolveStatus::NumericalFailure;
            break;
        }

        // h'dz for a scaled dz.
        ConeVec h_scaled;
        h_scaled.lp = h.lp.cwiseQuotient(w_lp_);
        for (std::size_t j = 0; j < blocks_.size(); ++j) {
            h_scaled.psd.push_back(scal_[j].Rinv * h.psd[j] * scal_[j].Rinv.transpose());
        }

        const Direction v1 = solve_kkt(-c, b, h, nullptr);
        // c'x1 + b'y1 + h'z1 = -||W z1||^2 when the KKT system is consistent;
        // the direct form dominates when it is not (unbounded problems).
        const double denom = kappa_ / tau_ + std::max(dot(v1.zs, v1.zs),
                                                      -(c.dot(v1.x) + b.dot(v1.y) + dot(h_scaled, v1.zs)));

        auto combine = [&](const ConeVec &ds_target, double dkappa_target, double eta, Direction &d, double &dtau,
                           double &dkappa, ConeVec &ds_scaled) {
            const ConeVec ld = lambda_div(ds_target);
            d = solve_kkt(-eta * rx, -eta * ry, scaled(-eta, rz), &ld);
            dtau = (eta * rtau + dkappa_target / tau_ + c.dot(d.x) + b.dot(d.y) + dot(h_scaled, d.zs)) / denom;
            d.x += dtau * v1.x;
            d.y += dtau * v1.y;
            axpy(dtau, v1.zs, d.zs);
            dkappa = (dkappa_target - kappa_ * dtau) / tau_;
            ds_scaled = ld;
            axpy(-1.0, d.zs, ds_scaled);
        };

        auto step_limit = [&](const ConeVec &dss, const ConeVec &dzs, double dtau, double dkappa) {
            double a = max_cone_step(dss, dzs);
            if (dtau < 0.0) a = std::min(a, -tau_ / dtau);
            if (dkappa < 0.0) a = std::min(a, -kappa_ / dkappa);
            return a;
        };

        // Predictor.
        const ConeVec lam2 = jordan(lam, lam);
        Direction da;
        double dtau_a = 0.0, dkappa_a = 0.0;
        ConeVec dss_a;
        combine(scaled(-1.0, lam2), -tau_ * kappa_, 1.0, da, dtau_a, dkappa_a, dss_a);
        const double alpha_a = std::min(1.0, step_limit(dss_a, da.zs, dtau_a, dkappa_a));
        const double sigma = std::clamp(std::pow(1.0 - alpha_a, 3.0), 1e-8, 1.0);

        // Corrector.
        ConeVec ds_target = scaled(-1.0, lam2);
        axpy(-1.0, jordan(dss_a, da.zs), ds_target);
        axpy(sigma * mu, e, ds_target);
        const double dkappa_target = -tau_ * kappa_ - dtau_a * dkappa_a + sigma * mu;
        Direction d;
        double dtau = 0.0, dkappa = 0.0;
        ConeVec dss;
        combine(ds_target, dkappa_target, 1.0 - sigma, d, dtau, dkappa, dss);
        const double limit = step_limit(dss, d.zs, dtau, dkappa);
        const double alpha = std::min(1.0, kStepFraction * limit);
        if (std::isnan(limit) || !std::isfinite(dtau) || !d.x.allFinite() || alpha < 1e-12) {
            status = SolveStatus::NumericalFailure;
            break;
        }

        // Update in scaled coordinates: the new PSD scaling is composed with
        // the old one, which keeps lambda accurate when W is ill conditioned.
        double step = alpha;
        bool accepted = false;
        for (int bt = 0; bt < 30 && !accepted; ++bt, step *= 0.7) {
            std::vector<BlockScaling> next(scal_.size());
            bool ok = true;
            for (std::size_t j = 0; j < blocks_.size() && ok; ++j) {
                Eigen::MatrixXd ts = dss.psd[j] * step;
                Eigen::MatrixXd tz = d.zs.psd[j] * step;
                ts.diagonal() += scal_[j].lambda;
                tz.diagonal() += scal_[j].lambda;
                BlockScaling inner;
                ok = nt_scaling(0.5 * (ts + ts.transpose()), 0.5 * (tz + tz.transpose()), inner);
                if (!ok) break;
                next[j].R = scal_[j].R * inner.R;
                next[j].Rinv = inner.Rinv * scal_[j].Rinv;
                next[j].Q = next[j].Rinv.transpose() * next[j].Rinv;
                next[j].lambda = inner.lambda;
            }
            const Eigen::VectorXd s_new = w_lp_.cwiseProduct(lambda_lp_ + step * dss.lp);
            const Eigen::VectorXd z_new = (lambda_lp_ + step * d.zs.lp).cwiseQuotient(w_lp_);
            if (!ok || (m_lp_ && (!(s_new.minCoeff() > 0.0) || !(z_new.minCoeff() > 0.0))) ||
                !(tau_ + step * dtau > 0.0) || !(kappa_ + step * dkappa > 0.0)) {
                continue;
            }
            scal_ = std::move(next);
            s_lp_ = s_new;
            z_lp_ = z_new;
            x_ += step * d.x;
            y_ += step * d.y;
            tau_ += step * dtau;
            kappa_ += step * dkappa;
            accepted = true;
        }
        if (!accepted) {
            status = SolveStatus::NumericalFailure;
            break;
        }
    }

    // Report the best point seen when the method did not converge.
    double tau = tau_;
    if (status != SolveStatus::Optimal && best.score < kInf) {
        x_ = best.x;
        y_ = best.y;
        S = best.s;
        Z = best.z;
        tau = best.tau;
    }
    sol.status = status;
    sol.iterations = iter;
    sol.x = x_ / tau;
    sol.y = y_ / tau;
    sol.z = Z.lp / tau;
    sol.Z.clear();
    for (const auto &m : Z.psd) sol.Z.push_back(m / tau);

    sol.primal_objective = c.dot(sol.x);
    sol.dual_objective = -b.dot(sol.y) - P_.h.dot(sol.z);
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
        sol.dual_objective -= blocks_[j].constant.cwiseProduct(sol.Z[j]).sum();
    }
    ConeVec zbar;
    zbar.lp = sol.z;
    zbar.psd = sol.Z;
    const Eigen::VectorXd dual_res =
        (m_eq_ ? Eigen::VectorXd(At_ * sol.y) : Eigen::VectorXd::Zero(n_)) + GT_apply(zbar) + c;
    sol.dual_residual = inf_norm(dual_res) / (1.0 + c_norm);
    double pres = m_eq_ ? inf_norm(Eigen::VectorXd(P_.A * sol.x - b)) : 0.0;
    if (m_lp_) pres = std::max(pres, (P_.G * sol.x - P_.h).cwiseMax(0.0).maxCoeff());
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P_.psd[j].evaluate(sol.x), Eigen::EigenvaluesOnly);
        pres = std::max(pres, -es.eigenvalues()(0));
    }
    sol.primal_residual = pres / (1.0 + bh_norm);
    sol.gap = dot(S, Z) / (tau * tau);
    return sol;
}

}  // namespace

Solution solve(const Problem &problem, const ToleranceConfig &tol) {
    Solver solver(problem, tol);
    return solver.run();
}

}  // namespace conic
}  // namespace projconst
