#include "projconst/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>

using projconst::cli::OutputFormat;
using projconst::cli::RunConfig;

int main(int argc, char **argv) {
    CLI::App app{"Bounds on projection constants of polynomial spaces"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string out_path;
    const std::map<std::string, OutputFormat> formats{
        {"json", OutputFormat::Json}, {"csv", OutputFormat::Csv}, {"text", OutputFormat::Text}};

    const auto common = [&](CLI::App *sub, bool needs_space) {
        auto *space = sub->add_option("--space", cfg.space, "P:<d> | mono:<i,...> | cheb1:<i,...> | cheb2:<i,...>");
        if (needs_space) space->required();
        sub->add_option("--out", out_path, "write the report to this file");
        sub->add_option("--format", cfg.format, "json, csv or text")->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
        sub->add_flag("--no-symmetry{false}", cfg.symmetric, "use the general programs even for parity-invariant spaces");
        sub->add_flag("--timings", cfg.timings, "include wall times");
    };
    const auto sizes = [&](CLI::App *sub) {
        sub->add_option("--K", cfg.K, "Dirac support size (upper bound)")->check(CLI::PositiveNumber);
        sub->add_option("--L", cfg.L, "grid size")->check(CLI::PositiveNumber);
        sub->add_option("--S", cfg.S, "moment order (lower bound)")->check(CLI::PositiveNumber);
    };
    const auto budget = [&](CLI::App *sub) {
        sub->add_option("--gap", cfg.gap, "target gap")->check(CLI::PositiveNumber);
        sub->add_option("--budget-seconds", cfg.budget_seconds, "wall-clock budget per bracket")->check(CLI::PositiveNumber);
    };

    auto *upper = app.add_subcommand("upper", "LP upper bound");
    common(upper, true);
    sizes(upper);
    auto *lower = app.add_subcommand("lower", "SDP lower bound");
    common(lower, true);
    sizes(lower);
    auto *br = app.add_subcommand("bracket", "refine both bounds until the gap is small");
    common(br, true);
    sizes(br);
    budget(br);
    auto *t1 = app.add_subcommand("table1", "three-dimensional spaces");
    common(t1, false);
    budget(t1);
    auto *t2 = app.add_subcommand("table2", "polynomials of degree 2..d");
    common(t2, false);
    budget(t2);
    t2->add_option("--d-max", cfg.d_max, "largest degree")->check(CLI::Range(2, 12));
    auto *meas = app.add_subcommand("measures", "dual measures of the upper-bound LP");
    common(meas, true);
    sizes(meas);
    auto *shape = app.add_subcommand("shape-check", "convexity test on the leading functional");
    common(shape, false);
    sizes(shape);
    shape->add_option("input", cfg.input, "measures JSON written by the measures command");
    auto *val = app.add_subcommand("validate", "built-in self checks");
    common(val, false);
    val->add_option("--seed", cfg.seed, "random seed");

    CLI11_PARSE(app, argc, argv);
    cfg.command = app.get_subcommands().front()->get_name();
    if (cfg.command == "shape-check" && cfg.input.empty() && cfg.space.empty()) {
        std::cerr << "shape-check needs a measures file or --space\n";
        return projconst::cli::kExitUsage;
    }

    if (out_path.empty()) return projconst::cli::run(cfg, std::cout);
    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "cannot write " << out_path << '\n';
        return projconst::cli::kExitUsage;
    }
    return projconst::cli::run(cfg, out);
}
