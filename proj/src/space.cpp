#include "projconst/space.hpp"

#include "projconst/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <charconv>
#include <string>

namespace projconst {

namespace {

int max_nonzero_row(const Eigen::MatrixXd &c) {
    for (Eigen::Index k = c.rows() - 1; k > 0; --k) {
        if ((c.row(k).array() != 0.0).any()) return static_cast<int>(k);
    }
    return 0;
}

Eigen::MatrixXd columns_of(std::span<const ChebSeries> gens) {
    int rows = 1;
    for (const auto &g : gens) rows = std::max(rows, g.degree() + 1);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(gens.size()));
    for (std::size_t m = 0; m < gens.size(); ++m) {
        const auto coeffs = gens[m].coeffs();
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
            c(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) = coeffs[k];
        }
    }
    return c;
}

std::string join(std::span<const int> v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

}  // namespace

int numerical_rank(const Eigen::MatrixXd &m) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto &sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > kRankTolerance * sv(0)) ++rank;
    }
    return rank;
}

PolySpace::PolySpace(Eigen::MatrixXd coefficients, std::string label) : label_(std::move(label)) {
    if (coefficients.cols() == 0 || coefficients.rows() == 0) {
        throw Error(ErrorCode::InvalidArgument, "a space needs at least one generator");
    }
    degree_ = max_nonzero_row(coefficients);
    coeffs_ = coefficients.topRows(degree_ + 1);
    const int M = dim();
    if (numerical_rank(coeffs_) < M) {
        throw Error(ErrorCode::RankDeficient,
                    "generators are linearly dependent (" + std::to_string(M) + " generators)");
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(coeffs_);
    orthonormal_ = qr.householderQ() * Eigen::MatrixXd::Identity(coeffs_.rows(), M);
}

Eigen::MatrixXd PolySpace::padded_coefficients(int rows) const {
    if (rows < coeffs_.rows()) {
        throw Error(ErrorCode::InvalidArgument, "cannot pad below the space degree");
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, coeffs_.cols());
    out.topRows(coeffs_.rows()) = coeffs_;
    return out;
}

ChebSeries PolySpace::generator(int m) const {
    const Eigen::VectorXd col = coeffs_.col(m);
    return ChebSeries(std::vector<double>(col.data(), col.data() + col.size()));
}

double PolySpace::eval(int m, double x) const {
    return cheb_eval(std::span<const double>(coeffs_.col(m).data(), static_cast<std::size_t>(coeffs_.rows())), x);
}

PolySpace make_space(std::span<const ChebSeries> generators, std::string label) {
    if (generators.empty()) {
        throw Error(ErrorCode::InvalidArgument, "a space needs at least one generator");
    }
    return PolySpace(columns_of(generators), std::move(label));
}

PolySpace polynomials_up_to(int d) {
    if (d < 0) throw Error(ErrorCode::InvalidArgument, "negative degree");
    std::vector<int> powers(static_cast<std::size_t>(d) + 1);
    for (int i = 0; i <= d; ++i) powers[static_cast<std::size_t>(i)] = i;
    PolySpace s = monomial_span(powers);
    return PolySpace(s.coefficients(), "P:" + std::to_string(d));
}

PolySpace monomial_span(std::span<const int> powers) {
    std::vector<ChebSeries> gens;
    for (int p : powers) gens.push_back(ChebSeries::monomial(p));
    return make_space(gens, "mono:" + join(powers));
}

PolySpace first_kind_span(std::span<const int> indices) {
    std::vector<ChebSeries> gens;
    for (int k : indices) gens.push_back(ChebSeries::first_kind(k));
    return make_space(gens, "cheb1:" + join(indices));
}

PolySpace second_kind_span(std::span<const int> indices) {
    std::vector<ChebSeries> gens;
    for (int k : indices) gens.push_back(ChebSeries::second_kind(k));
    return make_space(gens, "cheb2:" + join(indices));
}

ParitySplit parity_split(const PolySpace &space) {
    const Eigen::MatrixXd &U = space.coefficients();
    const int M = space.dim();

    // Greedily keep the even (resp. odd) coefficient projections of the
    // generators that enlarge the span; structural zero pattern, no sampling.
    auto select = [&](int parity) {
        Eigen::MatrixXd chosen(U.rows(), 0);
        for (int m = 0; m < M; ++m) {
            Eigen::VectorXd col = U.col(m);
            for (Eigen::Index k = 0; k < col.size(); ++k) {
                if (k % 2 != parity) col(k) = 0.0;
            }
            if (col.lpNorm<Eigen::Infinity>() == 0.0) continue;
            Eigen::MatrixXd trial(U.rows(), chosen.cols() + 1);
            trial << chosen, col;
            if (numerical_rank(trial) > chosen.cols()) chosen = std::move(trial);
        }
        return chosen;
    };

    const Eigen::MatrixXd even = select(0);
    const Eigen::MatrixXd odd = select(1);
    if (even.cols() + odd.cols() != M) {
        throw Error(ErrorCode::NotSymmetric,
                    "space is not invariant under x -> -x (even and odd parts span dimension " +
                        std::to_string(even.cols() + odd.cols()) + " > " + std::to_string(M) + ")");
    }

    ParitySplit split;
    split.degree = space.degree();
    if (even.cols() > 0) split.even.emplace(even, space.label() + " [even]");
    if (odd.cols() > 0) split.odd.emplace(odd, space.label() + " [odd]");

    Eigen::MatrixXd basis(U.rows(), M);
    basis << even, odd;
    split.to_split = basis.colPivHouseholderQr().solve(U);
    return split;
}

bool is_parity_invariant(const PolySpace &space) {
    try {
        (void)parity_split(space);
        return true;
    } catch (const Error &e) {
        if (e.code() == ErrorCode::NotSymmetric) return false;
        throw;
    }
}

ShiftedBasis shift_basis(const Eigen::MatrixXd &coefficients) {
    ShiftedBasis out{Eigen::MatrixXd::Zero(coefficients.rows(), coefficients.cols())};
    for (Eigen::Index m = 0; m < coefficients.cols(); ++m) {
        const Eigen::VectorXd col = coefficients.col(m);
        const ChebSeries shifted =
            shift_to_half_interval(ChebSeries(std::vector<double>(col.data(), col.data() + col.size())));
        const auto c = shifted.coeffs();
        for (std::size_t k = 0; k < c.size(); ++k) out.coefficients(static_cast<Eigen::Index>(k), m) = c[k];
    }
    return out;
}

Eigen::MatrixXd collocation(const Eigen::MatrixXd &coefficients, std::span<const double> points) {
    const auto rows = static_cast<std::size_t>(coefficients.rows());
    Eigen::MatrixXd out(static_cast<Eigen::Index>(points.size()), coefficients.cols());
    for (Eigen::Index m = 0; m < coefficients.cols(); ++m) {
        const std::span<const double> col(coefficients.col(m).data(), rows);
        for (std::size_t i = 0; i < points.size(); ++i) {
            out(static_cast<Eigen::Index>(i), m) = cheb_eval(col, points[i]);
        }
    }
    return out;
}

PolySpace parse_space_spec(std::string_view text) {
    constexpr int kMaxIndex = 400;
    const std::size_t colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw ParseError("expected <kind>:<indices>", 0, std::string(text));
    }
    const std::string_view kind = text.substr(0, colon);
    if (kind != "P" && kind != "mono" && kind != "cheb1" && kind != "cheb2") {
        throw ParseError("unknown space kind '" + std::string(kind) + "'", 0, std::string(kind));
    }
    std::vector<int> indices;
    std::size_t pos = colon + 1;
    for (;;) {
        const std::size_t end = std::min(text.find(',', pos), text.size());
        const std::string_view tok = text.substr(pos, end - pos);
        int value = -1;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size() || value < 0 || value > kMaxIndex) {
            throw ParseError("expected an index in [0, " + std::to_string(kMaxIndex) + "]", pos, std::string(tok));
        }
        indices.push_back(value);
        if (end == text.size()) break;
        pos = end + 1;
    }
    if (kind == "P") {
        if (indices.size() != 1) throw ParseError("P takes a single degree", colon + 1, std::string(text.substr(colon + 1)));
        return polynomials_up_to(indices[0]);
    }
    if (kind == "mono") return monomial_span(indices);
    if (kind == "cheb1") return first_kind_span(indices);
    return second_kind_span(indices);
}

}  // namespace projconst
