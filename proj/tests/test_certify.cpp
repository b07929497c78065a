#include "doctest.h"

#include "projconst/certify.hpp"
#include "projconst/errors.hpp"

#include <cmath>

using namespace projconst;

namespace {

void check_trace(const Bracket &b) {
    double up = 1e300, lo = -1e300;
    for (const TraceEntry &e : b.trace) {
        if (e.side == BoundSide::Upper) {
            CHECK(e.best <= up);
            CHECK(e.best <= e.value);
            up = e.best;
        } else {
            CHECK(e.best >= lo);
            CHECK(e.best >= e.value);
            lo = e.best;
        }
    }
    CHECK(up == b.upper.value);
    CHECK(lo == b.lower.value);
    CHECK(b.gap == doctest::Approx(b.upper.value - b.lower.value));
    CHECK(b.lower.value <= b.upper.value + b.lower.margin + b.upper.margin);
}

}  // namespace

TEST_CASE("trivial spaces") {
    ScheduleConfig s;
    for (const char *spec : {"P:0", "P:1", "mono:0,2,3"}) {
        CAPTURE(spec);
        const Bracket b = bracket(parse_space_spec(spec), s);
        CHECK(b.converged);
        CHECK(b.contains(1.0));
        CHECK(b.gap <= 1e-3);
        check_trace(b);
    }
}

TEST_CASE("quadratics") {
    ScheduleConfig s;
    s.target_gap = 2e-3;
    const Bracket b = bracket(polynomials_up_to(2), s);
    CHECK(b.contains(1.220173064217988));
    CHECK(b.gap <= 2e-3);
    check_trace(b);
    // Default initial parameters for d = 2.
    REQUIRE(b.trace.size() >= 2);
    CHECK(b.trace[0].side == BoundSide::Upper);
    CHECK(b.trace[0].K == 13);
    CHECK(b.trace[0].L == 12);
    CHECK(b.trace[1].S == 6);
    CHECK(b.trace[1].L == 12);
}

TEST_CASE("general programs bracket as well") {
    ScheduleConfig s;
    s.target_gap = 5e-3;
    s.symmetric = false;
    const Bracket b = bracket(polynomials_up_to(2), s);
    CHECK(b.upper.mode == ProgramMode::General);
    CHECK(b.contains(1.220173064217988));
    check_trace(b);
}

TEST_CASE("budget exhaustion keeps a valid bracket") {
    ScheduleConfig s;
    s.target_gap = 1e-6;
    s.max_seconds = 1e-3;
    try {
        (void)bracket(polynomials_up_to(3), s);
        FAIL("expected BudgetExhausted");
    } catch (const BudgetExhausted &e) {
        CHECK(e.code() == ErrorCode::BudgetExhausted);
        const Bracket &b = e.bracket();
        CHECK_FALSE(b.converged);
        CHECK(b.trace.size() == 2);
        CHECK(b.lower.value <= 1.35696);
        CHECK(b.upper.value >= 1.35667);
        check_trace(b);
    }

    ScheduleConfig capped;
    capped.target_gap = 1e-6;
    capped.max_K = 30;
    capped.max_S = 12;
    try {
        (void)bracket(polynomials_up_to(2), capped);
        FAIL("expected BudgetExhausted");
    } catch (const BudgetExhausted &e) {
        for (const TraceEntry &t : e.bracket().trace) {
            CHECK(t.K <= 30);
            CHECK(t.S <= 12);
        }
        CHECK(e.bracket().contains(1.220173064217988));
    }
}

TEST_CASE("schedule validation") {
    ScheduleConfig s;
    s.growth = 1.0;
    CHECK_THROWS_AS((void)bracket(polynomials_up_to(1), s), Error);
    s.growth = 1.6;
    s.target_gap = 0.0;
    CHECK_THROWS_AS((void)bracket(polynomials_up_to(1), s), Error);
}

TEST_CASE("known values") {
    const auto t1 = threedim_rows();
    REQUIRE(t1.size() == 6);
    CHECK(t1[0].known.value == 1.4723);
    CHECK(t1[4].spec == "cheb1:1,2,3");
    for (const TableRow &r : t1) CHECK_NOTHROW((void)parse_space_spec(r.spec));

    const auto t2 = degree_rows(12);
    REQUIRE(t2.size() == 11);
    CHECK(t2[0].known.value.has_value());
    CHECK(t2[1].known.paper_lower == 1.35667);
    CHECK(t2[9].spec == "P:11");
    CHECK_FALSE(t2[9].known.known_lower.has_value());
    CHECK_FALSE(t2[10].known.known_upper.has_value());
    CHECK(t2[10].known.paper_upper == 1.86216);
    for (const TableRow &r : t2) {
        if (r.known.known_lower) {
            CHECK(*r.known.known_lower <= *r.known.paper_lower);
            CHECK(*r.known.paper_lower <= *r.known.paper_upper);
            CHECK(*r.known.paper_upper <= *r.known.known_upper);
        }
    }
    CHECK(degree_rows(3).size() == 2);
    CHECK_THROWS_AS((void)degree_rows(1), Error);
    CHECK_THROWS_AS((void)degree_rows(13), Error);
}

TEST_CASE("table runs report rows independently") {
    std::vector<TableRow> rows(3);
    rows[0].label = "P0";
    rows[0].spec = "P:0";
    rows[1].label = "bad";
    rows[1].spec = "Q:1";
    rows[2].label = "P1";
    rows[2].spec = "P:1";
    ScheduleConfig s;
    for (int threads : {1, 3}) {
        const TableReport r = run_table("t", rows, s, threads);
        REQUIRE(r.rows.size() == 3);
        CHECK(r.rows[0].bracket.has_value());
        CHECK(r.rows[0].bracket->contains(1.0));
        CHECK_FALSE(r.rows[1].bracket.has_value());
        CHECK_FALSE(r.rows[1].error.empty());
        CHECK(r.rows[2].bracket->contains(1.0));
    }

    ScheduleConfig tight;
    tight.target_gap = 1e-7;
    tight.max_seconds = 1e-3;
    const TableReport r = run_table("t", {rows[2]}, tight, 1);
    CHECK(r.rows[0].budget_exhausted);
    CHECK(r.rows[0].bracket.has_value());
}
