#include "doctest.h"

#include "projconst/errors.hpp"
#include "projconst/space.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace projconst;

namespace {

ErrorCode code_of(auto &&f) {
    try {
        f();
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("make_space") {
    const std::vector<ChebSeries> t0{ChebSeries::first_kind(0)};
    const PolySpace s = make_space(t0);
    CHECK(s.degree() == 0);
    CHECK(s.dim() == 1);

    const std::vector<int> pw{0, 2, 3};
    const PolySpace m = monomial_span(pw);
    CHECK(m.degree() == 3);
    CHECK(m.dim() == 3);
    CHECK(m.label() == "mono:0,2,3");

    const std::vector<ChebSeries> dep{monomial_to_cheb(std::vector<double>{1}), monomial_to_cheb(std::vector<double>{0, 1}),
                                      monomial_to_cheb(std::vector<double>{2, 1})};
    CHECK(code_of([&] { (void)make_space(dep); }) == ErrorCode::RankDeficient);
    CHECK(code_of([&] { (void)make_space(std::vector<ChebSeries>{}); }) == ErrorCode::InvalidArgument);

    // Trailing zero coefficients do not inflate the degree.
    const std::vector<ChebSeries> padded{ChebSeries(std::vector<double>{1.0, 0.0, 0.0})};
    CHECK(make_space(padded).degree() == 0);
}

TEST_CASE("parity split") {
    SUBCASE("P_2") {
        const ParitySplit sp = parity_split(polynomials_up_to(2));
        CHECK(sp.even_dim() == 2);
        CHECK(sp.odd_dim() == 1);
    }
    SUBCASE("span{1, x, x^3}") {
        const std::vector<int> pw{0, 1, 3};
        const ParitySplit sp = parity_split(monomial_span(pw));
        CHECK(sp.even_dim() == 1);
        CHECK(sp.odd_dim() == 2);
    }
    SUBCASE("span{1 + x} is not symmetric") {
        const std::vector<ChebSeries> g{monomial_to_cheb(std::vector<double>{1, 1})};
        CHECK(code_of([&] { (void)parity_split(make_space(g)); }) == ErrorCode::NotSymmetric);
        CHECK_FALSE(is_parity_invariant(make_space(g)));
    }
    SUBCASE("span{1, 1 + x} equals P_1 and splits") {
        const std::vector<ChebSeries> g{monomial_to_cheb(std::vector<double>{1}),
                                        monomial_to_cheb(std::vector<double>{1, 1})};
        const ParitySplit sp = parity_split(make_space(g));
        CHECK(sp.even_dim() == 1);
        CHECK(sp.odd_dim() == 1);
    }
    SUBCASE("span{x^2 + x, x^3} is not symmetric") {
        const std::vector<ChebSeries> g{monomial_to_cheb(std::vector<double>{0, 1, 1}), ChebSeries::monomial(3)};
        CHECK_FALSE(is_parity_invariant(make_space(g)));
    }
    SUBCASE("structure and change of basis") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            // Random basis of P_d mixed so no generator has a definite parity.
            const int d = 1 + trial % 8;
            Eigen::MatrixXd C(d + 1, d + 1);
            for (int i = 0; i <= d; ++i)
                for (int j = 0; j <= d; ++j) C(i, j) = u(rng);
            const PolySpace s(C);
            const ParitySplit sp = parity_split(s);
            REQUIRE(sp.even_dim() + sp.odd_dim() == s.dim());
            Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(d + 1, s.dim());
            int col = 0;
            if (sp.even) {
                const auto &E = sp.even->coefficients();
                for (Eigen::Index k = 1; k < E.rows(); k += 2) CHECK(E.row(k).isZero(0.0));
                basis.block(0, col, E.rows(), E.cols()) = E;
                col += static_cast<int>(E.cols());
            }
            if (sp.odd) {
                const auto &O = sp.odd->coefficients();
                for (Eigen::Index k = 0; k < O.rows(); k += 2) CHECK(O.row(k).isZero(0.0));
                basis.block(0, col, O.rows(), O.cols()) = O;
            }
            CHECK((basis * sp.to_split - s.coefficients()).cwiseAbs().maxCoeff() <= 1e-10);
        }
    }
}

TEST_CASE("shift basis") {
    const std::vector<int> pw{0, 1, 2};
    const ShiftedBasis sb = shift_basis(monomial_span(pw));
    CHECK(sb.coefficients(0, 0) == doctest::Approx(1.0));
    CHECK(sb.coefficients(0, 1) == doctest::Approx(0.5));
    CHECK(sb.coefficients(1, 1) == doctest::Approx(0.5));
    CHECK(sb.coefficients(0, 2) == doctest::Approx(0.375));
    CHECK(sb.coefficients(1, 2) == doctest::Approx(0.5));
    CHECK(sb.coefficients(2, 2) == doctest::Approx(0.125));

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const PolySpace p = polynomials_up_to(12);
    const ShiftedBasis s = shift_basis(p);
    for (int i = 0; i < 100; ++i) {
        const double t = u(rng);
        for (int m = 0; m < p.dim(); ++m) {
            const Eigen::VectorXd col = s.coefficients.col(m);
            const double lhs = cheb_eval(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())), t);
            CHECK(std::abs(lhs - p.eval(m, (t + 1) / 2)) <= 1e-11);
        }
    }
}

TEST_CASE("collocation") {
    const std::vector<ChebSeries> t0{ChebSeries::first_kind(0)};
    const std::vector<double> pts{-1.0, 0.0, 1.0};
    CHECK(collocation(make_space(t0), pts).isApprox(Eigen::MatrixXd::Ones(3, 1)));

    const std::vector<ChebSeries> t01{ChebSeries::first_kind(0), ChebSeries::first_kind(1)};
    const auto z2 = cheb_zeros(2);
    const Eigen::MatrixXd V = collocation(make_space(t01), z2);
    CHECK(V(0, 1) == doctest::Approx(std::sqrt(0.5)));
    CHECK(V(1, 1) == doctest::Approx(-std::sqrt(0.5)));

    // Independent oracle: direct monomial powers.
    const auto z7 = cheb_zeros(7);
    const Eigen::MatrixXd W = collocation(polynomials_up_to(3), z7);
    for (int i = 0; i < 7; ++i)
        for (int m = 0; m <= 3; ++m) CHECK(std::abs(W(i, m) - std::pow(z7[static_cast<std::size_t>(i)], m)) <= 1e-12);

    for (int d = 0; d <= 8; ++d) {
        const PolySpace p = polynomials_up_to(d);
        for (int L = d + 1; L <= d + 4; ++L) {
            CHECK(numerical_rank(collocation(p, cheb_zeros(L))) == std::min(L, p.dim()));
        }
    }
}
