#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gengeom/errors.hpp"
#include "gengeom/spec.hpp"
#include "gengeom/suites.hpp"

namespace {

struct CheckArgs {
    std::string path;
    std::vector<std::string> suites;
    int points = 0;
    std::uint64_t seed = 0;
    double tol = 0.0;
    bool fd = false;
    bool force = false;
    std::string format = "text";
};

void add_check_options(CLI::App* cmd, CheckArgs& a, bool with_format) {
    cmd->add_option("spec", a.path, "spec file (JSON)")->required();
    cmd->add_option("--suite", a.suites, "suite to run, repeatable; 'all' runs the spec's list");
    cmd->add_option("--points", a.points, "number of sample points")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", a.seed, "sampling seed");
    cmd->add_option("--tol", a.tol, "absolute tolerance override")->check(CLI::NonNegativeNumber);
    cmd->add_flag("--fd", a.fd, "re-run a subset of derivative checks with finite differences");
    cmd->add_flag("--force", a.force, "record violated builder preconditions as warnings");
    if (with_format) cmd->add_option("--format", a.format, "text or json")->check(CLI::IsMember({"text", "json"}));
}

int run_check(const CheckArgs& a, CLI::App* cmd) {
    const gg::ManifoldSpec spec = gg::load_spec(a.path);
    gg::RunOptions opts;
    opts.suites = a.suites;
    if (cmd->count("--points")) opts.points = a.points;
    if (cmd->count("--seed")) opts.seed = a.seed;
    if (cmd->count("--tol")) opts.tol = a.tol;
    opts.fd = a.fd;
    opts.force = a.force;
    const gg::Report r = gg::run_checks(spec, opts);
    gg::emit_report(r, a.format == "json" ? gg::Format::Json : gg::Format::Text, std::cout);
    std::cout.flush();
    if (!std::cout) return 2;
    return r.exit_code();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sampled verification of generalized structures on TM + T*M"};
    app.require_subcommand(1);

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "parse and validate a spec file");
    validate->add_option("spec", validate_path, "spec file (JSON)")->required();

    CheckArgs check_args, report_args;
    auto* check = app.add_subcommand("check", "run verification suites");
    add_check_options(check, check_args, true);
    auto* report = app.add_subcommand("report", "same as check with --format json");
    add_check_options(report, report_args, false);
    report_args.format = "json";

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*validate) {
            const gg::ManifoldSpec spec = gg::load_spec(validate_path);
            std::cout << "OK " << spec.name << " (dimension " << spec.dim << ", " << spec.structures.size()
                      << " structures, " << spec.checks.size() << " suites)\n";
            return 0;
        }
        if (*check) return run_check(check_args, check);
        if (*report) return run_check(report_args, report);
    } catch (const gg::SyntaxError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
