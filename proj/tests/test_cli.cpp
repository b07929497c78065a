#include "doctest.h"

#include "projconst/cli.hpp"
#include "projconst/errors.hpp"
#include "projconst/space.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace projconst;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string text;
    json parsed() const { return json::parse(text); }
};

Run run(cli::RunConfig cfg) {
    std::ostringstream out;
    const int code = cli::run(cfg, out);
    return {code, out.str()};
}

cli::RunConfig command(std::string name, std::string space = {}) {
    cli::RunConfig c;
    c.command = std::move(name);
    c.space = std::move(space);
    return c;
}

}  // namespace

TEST_CASE("space specifications") {
    const PolySpace p2 = parse_space_spec("P:2");
    CHECK(p2.dim() == 3);
    CHECK(p2.degree() == 2);
    const PolySpace m = parse_space_spec("mono:0,2,3");
    CHECK(m.dim() == 3);
    CHECK(m.degree() == 3);
    CHECK(m.label() == "mono:0,2,3");
    CHECK(parse_space_spec("cheb2:1,2,3").label() == "cheb2:1,2,3");
    CHECK(parse_space_spec("cheb1:0,2,3").degree() == 3);

    auto parse_error = [](const char *text) -> std::pair<std::size_t, std::string> {
        try {
            (void)parse_space_spec(text);
        } catch (const ParseError &e) {
            return {e.position(), e.token()};
        }
        return {999, ""};
    };
    CHECK(parse_error("Q:1") == std::pair<std::size_t, std::string>{0, "Q"});
    CHECK(parse_error("mono:0,,2") == std::pair<std::size_t, std::string>{7, ""});
    CHECK(parse_error("mono:0,x") == std::pair<std::size_t, std::string>{7, "x"});
    CHECK(parse_error("P:2,3").first == 2);
    CHECK(parse_error("P:-1").second == "-1");
    CHECK(parse_error("P2").first == 0);
    CHECK(parse_error("mono: 1").second == " 1");
    CHECK(parse_error("cheb1:1,").first == 8);
    try {
        (void)parse_space_spec("mono:1,1");
        FAIL("expected RankDeficient");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::RankDeficient);
    }
}

TEST_CASE("number formatting") {
    CHECK(cli::format_number(1.0) == "1");
    CHECK(cli::format_number(1.220173064217988) == "1.22017306422");
    CHECK(cli::format_number(0.1) == "0.1");
    CHECK(cli::format_number(-2.5e-9) == "-2.5e-09");
    CHECK(cli::format_number(1.0 / 3.0) == "0.333333333333");
}

TEST_CASE("upper bound JSON schema") {
    cli::RunConfig c = command("upper", "mono:0,2,3");
    const Run r = run(c);
    REQUIRE(r.code == cli::kExitOk);
    const json j = r.parsed();
    CHECK(j.at("space") == "mono:0,2,3");
    CHECK(j.at("mode") == "symmetric");
    CHECK(j.at("params").contains("K"));
    CHECK(j.at("params").contains("L"));
    CHECK(j.at("bound").at("upper").get<double>() <= 1.001);
    CHECK(j.at("diagnostics").contains("rho"));
    CHECK(j.at("diagnostics").contains("solver_iters"));
    CHECK(j.at("diagnostics").contains("residuals"));
    // Keys come out sorted and the run is reproducible byte for byte.
    CHECK(r.text.find("\"bound\"") < r.text.find("\"diagnostics\""));
    CHECK(r.text.find("\"mode\"") < r.text.find("\"params\""));
    CHECK(run(c).text == r.text);
}

TEST_CASE("lower bound and no-symmetry") {
    cli::RunConfig c = command("lower", "P:2");
    c.S = 8;
    c.L = 12;
    c.symmetric = false;
    const json j = run(c).parsed();
    CHECK(j.at("mode") == "general");
    CHECK(j.at("params").at("S") == 8);
    const double v = j.at("bound").at("lower").get<double>();
    CHECK(v <= 1.220173064217988);
    CHECK(v >= 1.2);
    CHECK(j.at("diagnostics").at("rho").is_null());
}

TEST_CASE("bracket output") {
    cli::RunConfig c = command("bracket", "P:2");
    c.gap = 2e-3;
    const Run r = run(c);
    REQUIRE(r.code == cli::kExitOk);
    const json j = r.parsed();
    CHECK(j.at("bound").at("lower").get<double>() <= 1.220173064);
    CHECK(j.at("bound").at("upper").get<double>() >= 1.220173064);
    CHECK(j.at("status") == "converged");
    CHECK(j.at("trace").size() >= 2);
    CHECK_FALSE(j.at("trace")[0].contains("seconds"));
    CHECK(run(c).text == r.text);

    c.format = cli::OutputFormat::Text;
    const Run t = run(c);
    CHECK(t.text.rfind("P:2 (symmetric): [", 0) == 0);

    cli::RunConfig tight = command("bracket", "P:1");
    tight.gap = 1e-9;
    tight.budget_seconds = 1e-3;
    const Run e = run(tight);
    CHECK(e.code == cli::kExitBudget);
    CHECK(e.parsed().at("status") == "budget_exhausted");
}

TEST_CASE("measures and shape check round trip") {
    cli::RunConfig c = command("measures", "P:3");
    c.K = 21;
    c.L = 20;
    const Run m = run(c);
    REQUIRE(m.code == cli::kExitOk);
    const json j = m.parsed();
    CHECK(j.at("support").size() == 41);
    CHECK(j.at("weights").size() == 4);
    CHECK(j.at("atoms").size() == 4);

    c.format = cli::OutputFormat::Csv;
    const Run csv = run(c);
    CHECK(csv.text.rfind("functional,location,weight\n", 0) == 0);
    CHECK(csv.text.find("\n0,-1,") != std::string::npos);

    const std::string path = "test_cli_measures.json";
    {
        std::ofstream f(path);
        f << m.text;
    }
    cli::RunConfig s = command("shape-check");
    s.input = path;
    const Run sr = run(s);
    REQUIRE(sr.code == cli::kExitOk);
    const json sj = sr.parsed();
    CHECK(sj.at("d") == 3);
    CHECK(sj.at("K") == 20);
    CHECK(sj.at("witness").size() == 41);
    CHECK((sj.at("verdict") == "preserved" || sj.at("verdict") == "violated"));

    s.format = cli::OutputFormat::Csv;
    CHECK(run(s).text.rfind("k,location,f\n-20,-1,", 0) == 0);
    std::remove(path.c_str());

    cli::RunConfig missing = command("shape-check");
    missing.input = "does/not/exist.json";
    const Run mr = run(missing);
    CHECK(mr.code != cli::kExitOk);
    CHECK(mr.parsed().contains("error"));
}

TEST_CASE("errors are machine readable") {
    const Run r = run(command("upper", "mono:0,x"));
    CHECK(r.code == cli::kExitUsage);
    const json e = r.parsed().at("error");
    CHECK(e.at("code") == "ParseError");
    CHECK(e.at("position") == 7);
    CHECK(e.at("token") == "x");

    const Run u = run(command("frobnicate"));
    CHECK(u.code == cli::kExitUsage);

    cli::RunConfig bad = command("lower", "P:3");
    bad.S = 2;
    const Run b = run(bad);
    CHECK(b.code == cli::kExitError);
    CHECK(b.parsed().at("error").at("code") == "InvalidConfig");
}

TEST_CASE("tables in three formats") {
    cli::RunConfig c = command("table2");
    c.d_max = 2;
    c.gap = 5e-3;
    const json j = run(c).parsed();
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 1);
    CHECK(j[0].at("label") == "P2");
    CHECK(j[0].at("lower").get<double>() <= 1.220173064217988);
    CHECK(j[0].at("upper").get<double>() >= 1.220173064217988);
    CHECK(j[0].at("known").at("known_lower").get<double>() == doctest::Approx(1.22017306422));

    c.format = cli::OutputFormat::Csv;
    const std::string csv = run(c).text;
    CHECK(csv.rfind("label,space,lower,upper,gap,", 0) == 0);
    c.format = cli::OutputFormat::Text;
    const std::string text = run(c).text;
    CHECK(text.find("P2") != std::string::npos);
    CHECK(text.find("converged") != std::string::npos);
}

TEST_CASE("validate") {
    cli::RunConfig c = command("validate");
    c.seed = 11;
    const Run r = run(c);
    CHECK(r.code == cli::kExitOk);
    const json j = r.parsed();
    CHECK(j.at("status") == "pass");
    CHECK(j.at("seed") == 11);
    CHECK(run(c).text == r.text);
}

TEST_CASE("worker count honours PROJCONST_THREADS") {
    ::setenv("PROJCONST_THREADS", "2", 1);
    CHECK(cli::worker_count(8) == 2);
    CHECK(cli::worker_count(1) == 1);
    ::setenv("PROJCONST_THREADS", "junk", 1);
    CHECK(cli::worker_count(3) == 3);
    ::unsetenv("PROJCONST_THREADS");
    CHECK(cli::worker_count(0) >= 1);
}
