#include "projconst/cli.hpp"

#include "projconst/certify.hpp"
#include "projconst/chebyshev.hpp"
#include "projconst/errors.hpp"
#include "projconst/shape.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace projconst::cli {

using json = nlohmann::json;

namespace {

double round12(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return round12(v);
}

json num(const std::optional<double> &v) { return v ? num(*v) : json(nullptr); }

json vec(const Eigen::VectorXd &v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
    return a;
}

std::string str(std::string_view s) { return std::string(s); }

json residuals(const SolverReport &s) {
    return {{"primal", num(s.primal_residual)}, {"dual", num(s.dual_residual)}, {"gap", num(s.gap)},
            {"status", str(to_string(s.status))}};
}

int degree_of(const PolySpace &space) { return space.degree(); }

UpperConfig upper_config(const RunConfig &cfg, const PolySpace &space) {
    const int d = degree_of(space);
    UpperConfig u;
    u.K = cfg.K.value_or(16 * (d + 1) + 1);
    u.L = cfg.L.value_or(16 * (d + 1));
    u.symmetric = cfg.symmetric;
    return u;
}

LowerConfig lower_config(const RunConfig &cfg, const PolySpace &space) {
    const int d = degree_of(space);
    LowerConfig l;
    l.S = cfg.S.value_or(4 * (d + 1));
    l.L = cfg.L.value_or(8 * (d + 1));
    l.symmetric = cfg.symmetric;
    return l;
}

ScheduleConfig schedule_config(const RunConfig &cfg, double default_gap) {
    ScheduleConfig s;
    s.K0 = cfg.K.value_or(0);
    s.L0_upper = cfg.L.value_or(0);
    s.L0_lower = cfg.L.value_or(0);
    s.S0 = cfg.S.value_or(0);
    s.target_gap = cfg.gap.value_or(default_gap);
    if (cfg.budget_seconds) s.max_seconds = *cfg.budget_seconds;
    s.symmetric = cfg.symmetric;
    return s;
}

void write_json(std::ostream &out, const json &j) { out << j.dump(2) << '\n'; }

// Text helpers.
std::string cell(const std::optional<double> &v, int prec = 6) {
    if (!v) return "";
    std::ostringstream s;
    s << std::fixed << std::setprecision(prec) << *v;
    return s.str();
}

std::string csv_num(const std::optional<double> &v) { return v ? format_number(*v) : std::string(); }

// Upper / lower.

json bound_json(const PolySpace &space, const BoundResult &b) {
    json params = {{"L", b.L}};
    if (b.side == BoundSide::Upper) params["K"] = b.K;
    else params["S"] = b.S;
    json diag = {{"solver_iters", b.solver.iterations},
                 {"residuals", residuals(b.solver)},
                 {"program_value", num(b.program_value)},
                 {"margin", num(b.margin)}};
    diag["rho"] = b.side == BoundSide::Upper ? num(b.rho) : json(nullptr);
    return {{"space", space.label()},
            {"mode", str(to_string(b.mode))},
            {"params", params},
            {"bound", {{b.side == BoundSide::Upper ? "upper" : "lower", num(b.value)}}},
            {"diagnostics", diag}};
}

void emit_bound(const RunConfig &cfg, std::ostream &out, const PolySpace &space, const BoundResult &b, double seconds) {
    const bool up = b.side == BoundSide::Upper;
    switch (cfg.format) {
        case OutputFormat::Json: {
            json j = bound_json(space, b);
            if (cfg.timings) j["diagnostics"]["seconds"] = num(seconds);
            write_json(out, j);
            break;
        }
        case OutputFormat::Csv:
            out << "space,mode,side,K,L,S,value,rho,solver_iters\n";
            out << space.label() << ',' << to_string(b.mode) << ',' << (up ? "upper" : "lower") << ','
                << (up ? std::to_string(b.K) : "") << ',' << b.L << ',' << (up ? "" : std::to_string(b.S)) << ','
                << format_number(b.value) << ',' << (up ? format_number(b.rho) : "") << ',' << b.solver.iterations << '\n';
            break;
        case OutputFormat::Text:
            out << (up ? "upper bound " : "lower bound ") << space.label() << " (" << to_string(b.mode) << "): "
                << format_number(b.value) << '\n';
            if (up) out << "  K = " << b.K << ", L = " << b.L << ", rho = " << format_number(b.rho) << '\n';
            else out << "  S = " << b.S << ", L = " << b.L << '\n';
            out << "  program value " << format_number(b.program_value) << ", margin " << format_number(b.margin)
                << ", " << b.solver.iterations << " iterations";
            if (cfg.timings) out << ", " << format_number(seconds) << " s";
            out << '\n';
            break;
    }
}

// Bracket.

json trace_json(const Bracket &b, bool timings) {
    json t = json::array();
    for (const TraceEntry &e : b.trace) {
        json row = {{"side", e.side == BoundSide::Upper ? "upper" : "lower"},
                    {"L", e.L},
                    {"value", num(e.value)},
                    {"best", num(e.best)}};
        if (e.side == BoundSide::Upper) row["K"] = e.K;
        else row["S"] = e.S;
        if (timings) row["seconds"] = num(e.seconds);
        t.push_back(row);
    }
    return t;
}

json bracket_json(const PolySpace &space, const Bracket &b, bool exhausted, bool timings) {
    return {{"space", space.label()},
            {"mode", str(to_string(b.upper.mode))},
            {"params", {{"K", b.upper.K}, {"L", b.upper.L}, {"S", b.lower.S}, {"L_lower", b.lower.L}}},
            {"bound", {{"lower", num(b.lower.value)}, {"upper", num(b.upper.value)}, {"gap", num(b.gap)}}},
            {"status", exhausted ? "budget_exhausted" : "converged"},
            {"diagnostics",
             {{"rho", num(b.upper.rho)},
              {"solver_iters", {{"lower", b.lower.solver.iterations}, {"upper", b.upper.solver.iterations}}},
              {"residuals", {{"lower", residuals(b.lower.solver)}, {"upper", residuals(b.upper.solver)}}}}},
            {"trace", trace_json(b, timings)}};
}

int cmd_bracket(const RunConfig &cfg, std::ostream &out) {
    const PolySpace space = parse_space_spec(cfg.space);
    Bracket b;
    bool exhausted = false;
    try {
        b = bracket(space, schedule_config(cfg, 1e-3));
    } catch (const BudgetExhausted &e) {
        b = e.bracket();
        exhausted = true;
    }
    switch (cfg.format) {
        case OutputFormat::Json:
            write_json(out, bracket_json(space, b, exhausted, cfg.timings));
            break;
        case OutputFormat::Csv:
            out << "side,K,L,S,value,best" << (cfg.timings ? ",seconds" : "") << '\n';
            for (const TraceEntry &e : b.trace) {
                const bool up = e.side == BoundSide::Upper;
                out << (up ? "upper" : "lower") << ',' << (up ? std::to_string(e.K) : "") << ',' << e.L << ','
                    << (up ? "" : std::to_string(e.S)) << ',' << format_number(e.value) << ',' << format_number(e.best);
                if (cfg.timings) out << ',' << format_number(e.seconds);
                out << '\n';
            }
            break;
        case OutputFormat::Text:
            out << space.label() << " (" << to_string(b.upper.mode) << "): [" << format_number(b.lower.value) << ", "
                << format_number(b.upper.value) << "], gap " << format_number(b.gap)
                << (exhausted ? " (budget exhausted)" : "") << '\n';
            for (const TraceEntry &e : b.trace) {
                const bool up = e.side == BoundSide::Upper;
                out << "  " << (up ? "upper K=" + std::to_string(e.K) : "lower S=" + std::to_string(e.S))
                    << " L=" << e.L << "  " << cell(e.value, 7) << "  best " << cell(e.best, 7);
                if (cfg.timings) out << "  " << cell(e.seconds, 2) << " s";
                out << '\n';
            }
            break;
    }
    return exhausted ? kExitBudget : kExitOk;
}

// Tables.

json known_json(const KnownValues &k) {
    json j = json::object();
    if (k.value) j["value"] = num(k.value);
    if (k.known_lower || k.paper_lower || k.paper_upper || k.known_upper) {
        j["known_lower"] = num(k.known_lower);
        j["reference_lower"] = num(k.paper_lower);
        j["reference_upper"] = num(k.paper_upper);
        j["known_upper"] = num(k.known_upper);
    }
    return j;
}

struct Cells {
    std::optional<double> lower, upper, gap;
};

Cells bracket_cells(const TableRow &r) {
    if (!r.bracket) return {};
    return {r.bracket->lower.value, r.bracket->upper.value, r.bracket->gap};
}

std::string row_status(const TableRow &r) {
    if (!r.error.empty()) return "error";
    return r.budget_exhausted ? "budget_exhausted" : "converged";
}

void emit_table(const RunConfig &cfg, std::ostream &out, const TableReport &report) {
    switch (cfg.format) {
        case OutputFormat::Json: {
            json rows = json::array();
            for (const TableRow &r : report.rows) {
                json j = {{"label", r.label}, {"space", r.spec}, {"known", known_json(r.known)}, {"status", row_status(r)}};
                if (r.bracket) {
                    j["lower"] = num(r.bracket->lower.value);
                    j["upper"] = num(r.bracket->upper.value);
                    j["gap"] = num(r.bracket->gap);
                    j["params"] = {{"K", r.bracket->upper.K},
                                   {"L", r.bracket->upper.L},
                                   {"S", r.bracket->lower.S},
                                   {"L_lower", r.bracket->lower.L}};
                    if (cfg.timings) j["trace"] = trace_json(*r.bracket, true);
                }
                if (!r.error.empty()) j["error"] = r.error;
                rows.push_back(j);
            }
            write_json(out, rows);
            break;
        }
        case OutputFormat::Csv:
            out << "label,space,lower,upper,gap,value,known_lower,reference_lower,reference_upper,known_upper,status\n";
            for (const TableRow &r : report.rows) {
                const auto [lo, up, gap] = bracket_cells(r);
                out << r.label << ",\"" << r.spec << "\"," << csv_num(lo) << ',' << csv_num(up) << ',' << csv_num(gap)
                    << ',' << csv_num(r.known.value) << ',' << csv_num(r.known.known_lower) << ','
                    << csv_num(r.known.paper_lower) << ',' << csv_num(r.known.paper_upper) << ','
                    << csv_num(r.known.known_upper) << ',' << row_status(r) << '\n';
            }
            break;
        case OutputFormat::Text: {
            out << report.title << '\n';
            const bool ref = std::any_of(report.rows.begin(), report.rows.end(),
                                         [](const TableRow &r) { return r.known.paper_lower.has_value(); });
            out << std::left << std::setw(14) << "space" << std::right << std::setw(11) << "lower" << std::setw(11)
                << "upper" << std::setw(10) << "gap";
            if (ref) {
                out << std::setw(11) << "known lo" << std::setw(11) << "ref lo" << std::setw(11) << "ref up"
                    << std::setw(11) << "known up";
            } else {
                out << std::setw(11) << "reference";
            }
            out << "  status\n";
            for (const TableRow &r : report.rows) {
                const auto [lo, up, gap] = bracket_cells(r);
                out << std::left << std::setw(14) << r.label << std::right << std::setw(11) << cell(lo)
                    << std::setw(11) << cell(up) << std::setw(10) << cell(gap, 5);
                if (ref) {
                    out << std::setw(11) << cell(r.known.known_lower, 4) << std::setw(11) << cell(r.known.paper_lower, 5)
                        << std::setw(11) << cell(r.known.paper_upper, 5) << std::setw(11) << cell(r.known.known_upper, 4);
                } else {
                    out << std::setw(11) << cell(r.known.value, 4);
                }
                out << "  " << row_status(r);
                if (!r.error.empty()) out << ": " << r.error;
                out << '\n';
            }
            break;
        }
    }
}

// Measures and shape check.

json measures_json(const PolySpace &space, const UpperResult &r, const MeasureApprox &m) {
    json weights = json::array();
    for (Eigen::Index i = 0; i < m.A.rows(); ++i) weights.push_back(vec(m.A.row(i).transpose()));
    json atoms = json::array();
    for (const auto &list : m.atoms) {
        json a = json::array();
        for (const Atom &at : list) a.push_back({{"location", num(at.location)}, {"weight", num(at.weight)}});
        atoms.push_back(a);
    }
    json j = bound_json(space, r.bound);
    j["support"] = vec(Eigen::Map<const Eigen::VectorXd>(m.support.data(), static_cast<Eigen::Index>(m.support.size())));
    j["weights"] = weights;
    j["atoms"] = atoms;
    j["diagnostics"]["duality_residual"] = num(m.duality_residual);
    return j;
}

int cmd_measures(const RunConfig &cfg, std::ostream &out) {
    const PolySpace space = parse_space_spec(cfg.space);
    const UpperResult r = upper_bound(space, upper_config(cfg, space));
    const MeasureApprox m = extract_measures(r, space);
    switch (cfg.format) {
        case OutputFormat::Json:
            write_json(out, measures_json(space, r, m));
            break;
        case OutputFormat::Csv:
            out << "functional,location,weight\n";
            for (std::size_t i = 0; i < m.atoms.size(); ++i) {
                for (const Atom &a : m.atoms[i]) out << i << ',' << format_number(a.location) << ',' << format_number(a.weight) << '\n';
            }
            break;
        case OutputFormat::Text:
            out << "measures for " << space.label() << ", upper bound " << format_number(r.bound.value)
                << ", duality residual " << format_number(m.duality_residual) << '\n';
            for (std::size_t i = 0; i < m.atoms.size(); ++i) {
                out << "  functional " << i << ": " << m.atoms[i].size() << " atoms\n";
                for (const Atom &a : m.atoms[i]) out << "    " << cell(a.location, 6) << "  " << format_number(a.weight) << '\n';
            }
            break;
    }
    return kExitOk;
}

struct StoredMeasures {
    PolySpace space;
    Eigen::MatrixXd A;
    std::vector<double> support;
};

StoredMeasures load_measures(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
    json j;
    try {
        j = json::parse(in);
        StoredMeasures s{parse_space_spec(j.at("space").get<std::string>()), {}, j.at("support").get<std::vector<double>>()};
        const auto &w = j.at("weights");
        s.A.resize(static_cast<Eigen::Index>(w.size()), static_cast<Eigen::Index>(s.support.size()));
        for (std::size_t i = 0; i < w.size(); ++i) {
            const auto row = w[i].get<std::vector<double>>();
            if (row.size() != s.support.size()) throw Error(ErrorCode::DimensionMismatch, "weight row length differs from support");
            for (std::size_t k = 0; k < row.size(); ++k) s.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
        }
        return s;
    } catch (const json::exception &e) {
        throw Error(ErrorCode::InvalidArgument, path + ": " + e.what());
    }
}

int cmd_shape(const RunConfig &cfg, std::ostream &out) {
    std::optional<StoredMeasures> st;
    if (!cfg.input.empty()) {
        st = load_measures(cfg.input);
    } else {
        const PolySpace space = parse_space_spec(cfg.space);
        const UpperResult r = upper_bound(space, upper_config(cfg, space));
        st = StoredMeasures{space, r.A, r.support};
    }
    const Eigen::VectorXd a = leading_weights(st->A, st->support, st->space);
    const int d = st->space.degree();
    const ShapeResult r = convexity_violation({a, d, 1.0});
    const int K = static_cast<int>(a.size() / 2);
    switch (cfg.format) {
        case OutputFormat::Json:
            write_json(out, {{"space", st->space.label()},
                             {"d", d},
                             {"K", K},
                             {"verdict", str(to_string(r.verdict))},
                             {"value", num(r.value)},
                             {"witness", vec(r.witness)},
                             {"diagnostics", {{"solver_iters", r.solver.iterations}, {"residuals", residuals(r.solver)}}}});
            break;
        case OutputFormat::Csv:
            out << "k,location,f\n";
            for (int k = -K; k <= K; ++k) {
                out << k << ',' << format_number(static_cast<double>(k) / K) << ',' << format_number(r.witness(k + K)) << '\n';
            }
            break;
        case OutputFormat::Text:
            out << "order-" << d << " convexity for " << st->space.label() << " on " << 2 * K + 1 << " points: "
                << to_string(r.verdict) << " (min " << format_number(r.value) << ")\n";
            break;
    }
    return kExitOk;
}

// Built-in self checks; the full oracle suites live in the test tree.

struct Suite {
    int passed = 0, total = 0;
    void check(bool ok) {
        ++total;
        passed += ok;
    }
};

int cmd_validate(const RunConfig &cfg, std::ostream &out) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::map<std::string, Suite> suites;

    // Grid maxima times rho dominate the maximum on [-1, 1].
    for (auto [d, L] : {std::pair{3, 8}, {5, 16}, {8, 32}}) {
        const std::vector<double> zeros = cheb_zeros(L);
        const double rho = oversampling_factor(d, L, false);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> c(static_cast<std::size_t>(d) + 1);
            for (double &x : c) x = u(rng);
            double grid = 0.0, fine = 0.0;
            for (double z : zeros) grid = std::max(grid, std::abs(cheb_eval(c, z)));
            for (int i = 0; i <= 4000; ++i) fine = std::max(fine, std::abs(cheb_eval(c, -1.0 + i / 2000.0)));
            suites["sampling"].check(fine <= rho * grid + 1e-10);
        }
    }
    // Toeplitz matrices of cosine moments of nonnegative measures are PSD.
    for (int trial = 0; trial < 100; ++trial) {
        const int S = 2 + static_cast<int>(rng() % 9);
        Eigen::VectorXd y = Eigen::VectorXd::Zero(S);
        for (int atom = 0; atom < 4; ++atom) {
            const double th = std::numbers::pi * 0.5 * (u(rng) + 1.0), w = 0.5 * (u(rng) + 1.0);
            for (int k = 0; k < S; ++k) y(k) += w * std::cos(k * th);
        }
        const Eigen::MatrixXd T = toeplitz_from_vector(y, S);
        suites["toeplitz"].check(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(T).eigenvalues().minCoeff() >= -1e-10);
    }
    // max t s.t. A - t I PSD equals the smallest eigenvalue.
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd A = Eigen::MatrixXd::NullaryExpr(6, 6, [&] { return u(rng); });
        A = (A + A.transpose()).eval();
        ConicProgram cp;
        cp.objective = -Eigen::VectorXd::Ones(1);
        PsdBlock blk;
        blk.order = 6;
        blk.constant = A;
        for (int i = 0; i < 6; ++i) blk.terms.push_back(PsdTerm::entry(0, i, i, -1.0));
        cp.psd_blocks.push_back(blk);
        const SdpSolution s = solve_sdp(cp);
        const double ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues().minCoeff();
        suites["sdp_eigenvalue"].check(s.status == SolveStatus::Optimal && std::abs(s.x(0) - ev) <= 1e-7);
    }
    // Trivial spaces have projection constant one.
    for (const char *spec : {"P:0", "P:1", "mono:0,2,3"}) {
        const PolySpace space = parse_space_spec(spec);
        ScheduleConfig sc;
        sc.max_seconds = 120.0;
        try {
            const Bracket b = bracket(space, sc);
            suites["trivial_brackets"].check(b.contains(1.0) && b.gap <= 1e-3);
        } catch (const BudgetExhausted &) {
            suites["trivial_brackets"].check(false);
        }
    }

    bool ok = true;
    json js = json::object();
    for (const auto &[name, s] : suites) {
        js[name] = {{"passed", s.passed}, {"total", s.total}};
        ok = ok && s.passed == s.total;
    }
    switch (cfg.format) {
        case OutputFormat::Json:
            write_json(out, {{"seed", cfg.seed}, {"suites", js}, {"status", ok ? "pass" : "fail"}});
            break;
        case OutputFormat::Csv:
            out << "suite,passed,total\n";
            for (const auto &[name, s] : suites) out << name << ',' << s.passed << ',' << s.total << '\n';
            break;
        case OutputFormat::Text:
            for (const auto &[name, s] : suites) {
                out << (s.passed == s.total ? "PASS " : "FAIL ") << name << " " << s.passed << "/" << s.total << '\n';
            }
            break;
    }
    return ok ? kExitOk : kExitValidation;
}

void write_error(std::ostream &out, const Error &e) {
    json err = {{"code", str(to_string(e.code()))}, {"message", e.what()}};
    if (const auto *p = dynamic_cast<const ParseError *>(&e)) {
        err["position"] = p->position();
        err["token"] = p->token();
    }
    write_json(out, {{"error", err}});
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    const double r = round12(value);
    const auto res = std::to_chars(buf, buf + sizeof buf, r);
    return std::string(buf, res.ptr);
}

int worker_count(int requested) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    n = std::max(n, 1);
    if (const char *env = std::getenv("PROJCONST_THREADS")) {
        char *end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1) n = std::min<long>(n, cap);
    }
    return n;
}

int run(const RunConfig &cfg, std::ostream &out) {
    try {
        if (cfg.command == "upper" || cfg.command == "lower") {
            const PolySpace space = parse_space_spec(cfg.space);
            if (cfg.command == "upper") {
                const UpperResult r = upper_bound(space, upper_config(cfg, space));
                emit_bound(cfg, out, space, r.bound, r.bound.seconds);
            } else {
                const LowerResult r = lower_bound(space, lower_config(cfg, space));
                emit_bound(cfg, out, space, r.bound, r.bound.seconds);
            }
            return kExitOk;
        }
        if (cfg.command == "bracket") return cmd_bracket(cfg, out);
        if (cfg.command == "table1" || cfg.command == "table2") {
            const bool one = cfg.command == "table1";
            const ScheduleConfig s = schedule_config(cfg, one ? 5e-3 : 2e-3);
            const int threads = worker_count(cfg.threads);
            const TableReport report = one ? table_threedim(s, threads) : table_degrees(cfg.d_max, s, threads);
            emit_table(cfg, out, report);
            return kExitOk;
        }
        if (cfg.command == "measures") return cmd_measures(cfg, out);
        if (cfg.command == "shape-check") return cmd_shape(cfg, out);
        if (cfg.command == "validate") return cmd_validate(cfg, out);
        write_error(out, Error(ErrorCode::InvalidArgument, "unknown command '" + cfg.command + "'"));
        return kExitUsage;
    } catch (const Error &e) {
        write_error(out, e);
        return e.code() == ErrorCode::ParseError || e.code() == ErrorCode::InvalidArgument ? kExitUsage : kExitError;
    }
}

}  // namespace projconst::cli
