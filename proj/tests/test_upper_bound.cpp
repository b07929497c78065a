#include "doctest.h"

#include "oracles.hpp"
#include "projconst/chebyshev.hpp"
#include "projconst/errors.hpp"
#include "projconst/upper_bound.hpp"

#include <cmath>
#include <numbers>

using namespace projconst;

namespace {

UpperConfig config(int K, int L, bool symmetric = true) {
    UpperConfig c;
    c.K = K;
    c.L = L;
    c.symmetric = symmetric;
    return c;
}

std::vector<double> fine_grid(int n) {
    std::vector<double> x(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) x[static_cast<std::size_t>(i)] = -1.0 + 2.0 * i / n;
    return x;
}

}  // namespace

TEST_CASE("equispaced support") {
    CHECK(equispaced_points(1) == std::vector<double>{0.0});
    const auto v = equispaced_points(5);
    REQUIRE(v.size() == 5);
    CHECK(v.front() == -1.0);
    CHECK(v.back() == 1.0);
    CHECK(v[2] == doctest::Approx(0.0));
}

TEST_CASE("span{1} with a single point") {
    const std::vector<ChebSeries> gens{ChebSeries::first_kind(0)};
    const PolySpace one = make_space(gens);
    UpperConfig cfg = config(1, 1, false);
    cfg.support_points = {0.0};
    const UpperResult r = upper_bound(one, cfg);
    CHECK(r.bound.program_value == doctest::Approx(1.0).epsilon(1e-8));
    REQUIRE(r.A.size() == 1);
    CHECK(r.A(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.bound.value >= r.bound.program_value);

    const MeasureApprox m = extract_measures(r.A, r.support);
    REQUIRE(m.atoms.size() == 1);
    REQUIRE(m.atoms[0].size() == 1);
    CHECK(m.atoms[0][0].location == 0.0);
    CHECK(m.atoms[0][0].weight == doctest::Approx(1.0));

    // Symmetric path with no odd part agrees.
    const UpperResult s = upper_bound(one, config(3, 2));
    CHECK(s.bound.mode == ProgramMode::Symmetric);
    CHECK(s.bound.program_value == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("linear interpolation at the endpoints") {
    const UpperResult r = upper_bound(polynomials_up_to(1), config(2, 4, false));
    CHECK(r.bound.program_value == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.bound.rho == doctest::Approx(1.0 / std::cos(std::numbers::pi / 8.0)).epsilon(1e-14));
    CHECK(r.bound.value == doctest::Approx(r.bound.rho).epsilon(1e-8));
}

TEST_CASE("three-point support for the quadratics matches the Lagrange oracle") {
    UpperConfig cfg = config(3, 8, false);
    cfg.support_points = {-1.0, 0.0, 1.0};
    const UpperResult r = upper_bound(polynomials_up_to(2), cfg);
    // Chebyshev zeros by the trigonometric formula.
    std::vector<double> w;
    for (int l = 1; l <= 8; ++l) w.push_back(std::cos(std::numbers::pi * (l - 0.5) / 8.0));
    const Eigen::MatrixXd lag = oracles::lagrange_basis(cfg.support_points, w);
    const double expected = lag.cwiseAbs().colwise().sum().maxCoeff();
    CHECK(r.bound.program_value == doctest::Approx(expected).epsilon(1e-8));
    CHECK(r.bound.program_value >= 1.2201);
}

TEST_CASE("returned projections are valid and certified") {
    for (const char *spec : {"P:2", "P:3", "mono:0,1,3", "cheb1:0,2,3", "cheb2:1,2,3", "mono:1,2,3"}) {
        CAPTURE(spec);
        const PolySpace space = parse_space_spec(spec);
        for (bool sym : {true, false}) {
            const UpperResult r = upper_bound(space, config(sym ? 21 : 41, sym ? 20 : 40, sym));
            const MeasureApprox m = extract_measures(r, space);
            CHECK(m.duality_residual <= 1e-7);
            // The bound dominates the norm of the discrete projection it returns.
            const double norm = oracles::discrete_projection_norm(space.coefficients(), r.A, fine_grid(4000));
            CHECK(norm <= r.bound.value + 1e-9);
            CHECK(norm >= r.bound.program_value - 1e-7);
        }
    }
}

TEST_CASE("upper bounds stay above published lower bounds") {
    const UpperResult p3 = upper_bound(polynomials_up_to(3), config(41, 40));
    CHECK(p3.bound.value >= 1.3539);
    const UpperResult p4 = upper_bound(polynomials_up_to(4), config(41, 40));
    CHECK(p4.bound.value >= 1.4524);
    const UpperResult p2 = upper_bound(polynomials_up_to(2), config(41, 40));
    CHECK(p2.bound.value >= 1.220173064217988);
}

TEST_CASE("nested supports can only help") {
    const PolySpace p2 = polynomials_up_to(2);
    for (int L : {8, 16}) {
        UpperConfig a = config(11, L, false), b = config(21, L, false), c = config(41, L, false);
        a.support_points = equispaced_points(11);
        b.support_points = equispaced_points(21);
        c.support_points = equispaced_points(41);
        const double va = upper_bound(p2, a).bound.program_value;
        const double vb = upper_bound(p2, b).bound.program_value;
        const double vc = upper_bound(p2, c).bound.program_value;
        CHECK(vb <= va + 1e-8);
        CHECK(vc <= vb + 1e-8);
    }
}

TEST_CASE("symmetric and general programs agree") {
    const PolySpace p2 = polynomials_up_to(2);
    // 41 half-domain points unfold to the 81-point grid; the symmetric grid
    // needs half as many check points for the same rho.
    const UpperResult s = upper_bound(p2, config(41, 40, true));
    const UpperResult g = upper_bound(p2, config(81, 80, false));
    CHECK(s.bound.mode == ProgramMode::Symmetric);
    CHECK(g.bound.mode == ProgramMode::General);
    CHECK(std::abs(s.bound.value - g.bound.value) <= 2e-3);
    REQUIRE(s.support.size() == 81);
    for (std::size_t i = 0; i < s.support.size(); ++i) CHECK(s.support[i] == doctest::Approx(g.support[i]).epsilon(1e-14));
}

TEST_CASE("span{1, x^2, x^3} admits a projection of norm one") {
    const UpperResult r = upper_bound(monomial_span(std::vector<int>{0, 2, 3}), config(81, 80));
    CHECK(r.bound.value <= 1.001);
    CHECK(r.bound.value >= 1.0);
}

TEST_CASE("quadratic measures carry atoms at -1, 0 and 1") {
    const PolySpace p2 = polynomials_up_to(2);
    const UpperResult r = upper_bound(p2, config(41, 40));
    const MeasureApprox m = extract_measures(r, p2);
    bool left = false, mid = false, right = false;
    for (const auto &atoms : m.atoms) {
        for (const Atom &a : atoms) {
            left = left || (a.location == -1.0 && std::abs(a.weight) > 1e-2);
            mid = mid || (std::abs(a.location) < 1e-12 && std::abs(a.weight) > 1e-2);
            right = right || (a.location == 1.0 && std::abs(a.weight) > 1e-2);
        }
    }
    CHECK(left);
    CHECK(mid);
    CHECK(right);
}

TEST_CASE("atom threshold hides small weights but keeps the matrix") {
    Eigen::MatrixXd A(1, 3);
    A << 1.0, 1e-9, -0.5;
    const std::vector<double> v{0.5, -1.0, 1.0};
    const MeasureApprox m = extract_measures(A, v);
    REQUIRE(m.atoms[0].size() == 2);
    CHECK(m.atoms[0][0].location == 0.5);  // sorted by location
    CHECK(m.atoms[0][1].location == 1.0);
    CHECK(m.A(0, 1) == 1e-9);
    CHECK(std::isnan(m.duality_residual));
    CHECK_THROWS_AS((void)extract_measures(A, std::vector<double>{0.0}), Error);
}

TEST_CASE("grid validation") {
    const PolySpace p1 = polynomials_up_to(1);
    auto code = [&](const UpperConfig &cfg) {
        try {
            (void)upper_bound(p1, cfg);
        } catch (const Error &e) {
            return e.code();
        }
        return ErrorCode::InvalidArgument;
    };
    UpperConfig dup = config(2, 4, false);
    dup.support_points = {0.5, 0.5};
    CHECK(code(dup) == ErrorCode::InvalidGrid);
    UpperConfig outside = config(2, 4, false);
    outside.support_points = {0.0, 1.5};
    CHECK(code(outside) == ErrorCode::InvalidGrid);
    CHECK(code(config(0, 4, false)) == ErrorCode::InvalidGrid);
    // L must exceed d/2 for rho to exist.
    CHECK(code(config(5, 0, false)) == ErrorCode::InvalidGrid);
}
