#include "projconst/certify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace projconst {

namespace {

using Clock = std::chrono::steady_clock;

int grow(int value, double factor) { return std::max(value + 1, static_cast<int>(std::lround(value * factor))); }

struct SideState {
    BoundResult best;
    bool have = false;
    double last_delta = std::numeric_limits<double>::infinity();
    double last_seconds = 0.0;
    int failures = 0;
    bool capped = false;
};

void check(const ScheduleConfig &s) {
    if (!(s.growth > 1.0)) throw Error(ErrorCode::InvalidConfig, "growth factor must exceed 1");
    if (!(s.target_gap > 0.0)) throw Error(ErrorCode::InvalidConfig, "target gap must be positive");
    if (!(s.max_seconds > 0.0)) throw Error(ErrorCode::InvalidConfig, "time budget must be positive");
}

}  // namespace

Bracket bracket(const PolySpace &space, const ScheduleConfig &schedule) {
    check(schedule);
    const int d = space.degree();
    int K = schedule.K0 > 0 ? schedule.K0 : 4 * (d + 1) + 1;
    int Lu = schedule.L0_upper > 0 ? schedule.L0_upper : 4 * (d + 1);
    int Ll = schedule.L0_lower > 0 ? schedule.L0_lower : 4 * (d + 1);
    int S = schedule.S0 > 0 ? schedule.S0 : 2 * (d + 1);
    S = std::max(S, d + 1);

    const auto start = Clock::now();
    const auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

    Bracket out;
    SideState up, lo;

    const auto refine_upper = [&] {
        UpperConfig cfg;
        cfg.K = K;
        cfg.L = Lu;
        cfg.symmetric = schedule.symmetric;
        cfg.tol = schedule.upper_tol;
        const auto t0 = Clock::now();
        try {
            const BoundResult r = upper_bound(space, cfg).bound;
            up.last_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
            up.last_delta = up.have ? std::max(0.0, up.best.value - r.value) : std::numeric_limits<double>::infinity();
            if (!up.have || r.value < up.best.value) up.best = r;
            up.have = true;
            up.failures = 0;
            out.trace.push_back({BoundSide::Upper, K, Lu, 0, r.value, up.best.value, up.last_seconds});
        } catch (const Error &e) {
            if (e.code() != ErrorCode::NumericalFailure) throw;
            up.last_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
            if (++up.failures >= 2) up.capped = true;
        }
    };
    const auto refine_lower = [&] {
        LowerConfig cfg;
        cfg.S = S;
        cfg.L = Ll;
        cfg.symmetric = schedule.symmetric;
        cfg.tol = schedule.lower_tol;
        const auto t0 = Clock::now();
        try {
            const BoundResult r = lower_bound(space, cfg).bound;
            lo.last_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
            lo.last_delta = lo.have ? std::max(0.0, r.value - lo.best.value) : std::numeric_limits<double>::infinity();
            if (!lo.have || r.value > lo.best.value) lo.best = r;
            lo.have = true;
            lo.failures = 0;
            out.trace.push_back({BoundSide::Lower, 0, Ll, S, r.value, lo.best.value, lo.last_seconds});
        } catch (const Error &e) {
            if (e.code() != ErrorCode::NumericalFailure) throw;
            lo.last_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
            if (++lo.failures >= 2) lo.capped = true;
        }
    };
    const auto finish = [&] {
        out.upper = up.best;
        out.lower = lo.best;
        out.gap = up.best.value - lo.best.value;
        out.converged = up.have && lo.have && out.gap <= schedule.target_gap;
    };

    refine_upper();
    refine_lower();
    // A first failure at the initial size is retried once at the next size.
    bool first_round = true;
    for (;;) {
        finish();
        if (out.converged) return out;

        const bool up_room = !up.capped && grow(K, schedule.growth) <= schedule.max_K;
        const bool lo_room = !lo.capped && grow(S, schedule.growth) <= schedule.max_S;
        // Cost of a refinement grows roughly with the cube of the size.
        const double g3 = schedule.growth * schedule.growth * schedule.growth;
        const double left = schedule.max_seconds - elapsed();
        const bool up_ok = up_room && up.last_seconds * g3 <= left;
        const bool lo_ok = lo_room && lo.last_seconds * g3 <= left;
        if (!up_ok && !lo_ok) break;

        if (first_round && up_ok && lo_ok) {
            K = grow(K, schedule.growth);
            Lu = grow(Lu, schedule.growth);
            refine_upper();
            S = grow(S, schedule.growth);
            Ll = grow(Ll, schedule.growth);
            refine_lower();
            first_round = false;
            continue;
        }
        first_round = false;
        bool pick_upper;
        if (!up.have) pick_upper = up_ok;
        else if (!lo.have) pick_upper = !lo_ok;
        else pick_upper = up_ok && (!lo_ok || up.last_delta >= lo.last_delta);
        if (pick_upper) {
            K = grow(K, schedule.growth);
            Lu = grow(Lu, schedule.growth);
            refine_upper();
        } else {
            S = grow(S, schedule.growth);
            Ll = grow(Ll, schedule.growth);
            refine_lower();
        }
    }
    if (!up.have || !lo.have) {
        throw Error(ErrorCode::NumericalFailure, std::string("no ") + (up.have ? "lower" : "upper") +
                                                     " bound could be computed for " + space.label());
    }
    throw BudgetExhausted(out);
}

std::vector<TableRow> threedim_rows() {
    const auto row = [](std::string label, std::string spec, double value) {
        TableRow r;
        r.label = std::move(label);
        r.spec = std::move(spec);
        r.known.value = value;
        return r;
    };
    return {
        row("{1,x,x^3}", "mono:0,1,3", 1.4723),
        row("{T0,T2,T3}", "cheb1:0,2,3", 1.4460),
        row("{U0,U2,U3}", "cheb2:0,2,3", 1.1522),
        row("{x,x^2,x^3}", "mono:1,2,3", 1.3325),
        row("{T1,T2,T3}", "cheb1:1,2,3", 1.4065),
        row("{U1,U2,U3}", "cheb2:1,2,3", 1.2354),
    };
}

std::vector<TableRow> degree_rows(int d_max) {
    if (d_max < 2 || d_max > 12) throw Error(ErrorCode::InvalidArgument, "d_max must lie in [2, 12]");
    struct Known {
        int d;
        double kl, pl, pu, ku;  // NaN marks a blank cell
    };
    constexpr double na = std::numeric_limits<double>::quiet_NaN();
    // Published brackets: earlier literature (kl, ku) and the moment/LP method (pl, pu).
    // The quadratic case is known exactly.
    static const Known known[] = {
        {2, 1.220173064217988, 1.220173064217988, 1.220173064217988, 1.220173064217988},
        {3, 1.3539, 1.35667, 1.35696, 1.3577},
        {4, 1.4524, 1.45902, 1.45951, 1.4611},
        {5, 1.525, 1.53817, 1.53895, 1.543},
        {6, 1.580, 1.60271, 1.60383, 1.613},
        {7, 1.624, 1.65693, 1.65859, 1.669},
        {8, 1.660, 1.70483, 1.70731, 1.721},
        {9, 1.678, 1.74774, 1.75107, 1.775},
        {10, 1.696, 1.78658, 1.79076, 1.814},
        {11, na, 1.82169, 1.82701, na},
        {12, na, 1.85380, 1.86216, na},
    };
    const auto opt = [](double v) { return std::isnan(v) ? std::optional<double>{} : std::optional<double>{v}; };
    std::vector<TableRow> rows;
    for (const Known &k : known) {
        if (k.d > d_max) break;
        TableRow r;
        r.label = "P" + std::to_string(k.d);
        r.spec = "P:" + std::to_string(k.d);
        r.known.known_lower = opt(k.kl);
        r.known.paper_lower = opt(k.pl);
        r.known.paper_upper = opt(k.pu);
        r.known.known_upper = opt(k.ku);
        if (k.d == 2) r.known.value = k.pl;
        rows.push_back(std::move(r));
    }
    return rows;
}

TableReport run_table(std::string title, std::vector<TableRow> rows, const ScheduleConfig &schedule, int threads) {
    check(schedule);
    TableReport report{std::move(title), std::move(rows)};
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < report.rows.size(); i = next++) {
            TableRow &row = report.rows[i];
            try {
                row.bracket = bracket(parse_space_spec(row.spec), schedule);
            } catch (const BudgetExhausted &e) {
                row.bracket = e.bracket();
                row.budget_exhausted = true;
            } catch (const std::exception &e) {
                row.error = e.what();
            }
        }
    };
    const int n = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(1, report.rows.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    return report;
}

TableReport table_threedim(const ScheduleConfig &schedule, int threads) {
    return run_table("three-dimensional spaces", threedim_rows(), schedule, threads);
}

TableReport table_degrees(int d_max, const ScheduleConfig &schedule, int threads) {
    return run_table("polynomials of degree d", degree_rows(d_max), schedule, threads);
}

}  // namespace projconst
