#include <doctest.h>

#include <array>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gengeom/errors.hpp"
#include "gengeom/spec.hpp"
#include "gengeom/suites.hpp"

using namespace gg;
using nlohmann::json;

namespace {

const std::vector<std::string> kCorpus{"norden_r11",         "para_norden_r2",  "trivial_or",   "statistical_jj",
                                       "nonstatistical_jj",  "quaternion_r4",   "para_product_pair_r2",
                                       "lambda_family",      "obata_vs_canonical_r4", "family_invariance"};

std::string spec_path(const std::string& name) { return std::string(GG_SPEC_DIR) + "/" + name + ".json"; }

json small_doc() {
    return json::parse(R"J({
      "name": "small",
      "dimension": 2,
      "coordinates": ["x", "y"],
      "domain": [[1, 2], [-1, 1]],
      "metric": {"matrix": [["1", "0"], ["0", "x"]]},
      "endomorphisms": {"J": [["cos(y)", "sqrt(x)*sin(y)"], ["sin(y)/sqrt(x)", "-cos(y)"]]},
      "connection": {"kind": "flat"},
      "structures": [{"name": "S", "builder": "single", "J": "J"}],
      "checks": ["base", "connection"],
      "sampling": {"points": 8}
    })J");
}

struct Run {
    int code;
    std::string out;
};

Run cli(const std::string& args) {
    const std::string cmd = std::string(GG_CLI) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::string out;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), p)) out += buf.data();
    const int st = pclose(p);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string write_temp(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << text;
    return path.string();
}

} // namespace

TEST_CASE("the bundled corpus loads") {
    for (const auto& n : kCorpus) {
        CAPTURE(n);
        const ManifoldSpec s = load_spec(spec_path(n));
        CHECK(s.name == n);
        CHECK(s.dim >= 2);
        CHECK_FALSE(s.checks.empty());
        CHECK_FALSE(s.expressions.empty());
    }
}

TEST_CASE("spec errors") {
    json d = small_doc();
    CHECK_NOTHROW(parse_spec(d));

    json bad = d;
    bad["endomorphisms"]["J"][0][0] = "x +";
    try {
        parse_spec(bad);
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.position == 3);
    }

    bad = d;
    bad["endomorphisms"]["J"][0][0] = "q*x";
    CHECK_THROWS_AS(parse_spec(bad), UnknownIdentifier);

    bad = d;
    bad["structures"][0]["J"] = "J9";
    CHECK_THROWS_AS(parse_spec(bad), UnknownReference);

    bad = d;
    bad.erase("dimension");
    CHECK_THROWS_AS(parse_spec(bad), ParseError);

    bad = d;
    bad["metric"]["matrix"] = json::array({json::array({"1"})});
    CHECK_THROWS(parse_spec(bad));

    CHECK_THROWS_AS(load_spec(spec_path("does_not_exist")), ParseError);
}

TEST_CASE("failing checks carry witnesses and exit code 1") {
    const ManifoldSpec s = parse_spec(small_doc());
    const Report r = run_checks(s);
    CHECK(r.exit_code() == 1);
    const CheckResult* c = r.find("base.J.parallel");
    REQUIRE(c != nullptr);
    CHECK(c->status == Status::Fail);
    REQUIRE(c->witness.has_value());
    CHECK(c->witness->x.size() == 2);
    CHECK(c->max_residual > 1e-3);
    CHECK(r.find("base.metric.symmetry")->status == Status::Pass);

    json d = small_doc();
    d["expect"] = {{"base.J.parallel", "fail"}, {"connection.quasi_statistical", "fail"}};
    CHECK(run_checks(parse_spec(d)).exit_code() == 0);
}

TEST_CASE("runtime errors give exit code 2") {
    json d = small_doc();
    d["metric"]["matrix"] = json::array({json::array({"1", "0"}), json::array({"0", "0"})});
    const Report r = run_checks(parse_spec(d));
    CHECK(r.exit_code() == 2);

    RunOptions o;
    o.suites = {"no_such_suite"};
    const Report u = run_checks(parse_spec(small_doc()), o);
    CHECK(u.exit_code() == 2);
    REQUIRE(u.find("no_such_suite.suite") != nullptr);
    CHECK(u.find("no_such_suite.suite")->status == Status::Error);
}

TEST_CASE("reports are deterministic and round-trip through JSON") {
    const ManifoldSpec s = parse_spec(small_doc());
    std::ostringstream a, b, t;
    Report r1 = run_checks(s), r2 = run_checks(s);
    r1.wall_time_ms = r2.wall_time_ms = 0;
    emit_report(r1, Format::Json, a);
    emit_report(r2, Format::Json, b);
    CHECK(a.str() == b.str());

    const json j = json::parse(a.str());
    CHECK(j["spec"] == "small");
    CHECK(j["seed"] == 42);
    CHECK(j["points"] == 8);
    REQUIRE(j["checks"].size() == r1.checks.size());
    for (std::size_t i = 0; i < r1.checks.size(); ++i) {
        CHECK(j["checks"][i]["name"] == r1.checks[i].full_name());
        std::string v = to_string(r1.checks[i].status);
        for (auto& ch : v) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        CHECK(j["checks"][i]["verdict"].get<std::string>() == v);
        CHECK(j["checks"][i]["max_residual"].get<double>() == doctest::Approx(r1.checks[i].max_residual));
    }

    emit_report(r1, Format::Text, t);
    std::istringstream lines(t.str());
    std::string first;
    std::getline(lines, first);
    CHECK(first.rfind("PASS base.metric.nondegenerate max_residual=", 0) == 0);

    RunOptions o;
    o.seed = 7;
    o.points = 5;
    const Report r3 = run_checks(s, o);
    CHECK(r3.seed == 7);
    CHECK(r3.points == 5);
}

TEST_CASE("finite-difference cross-check") {
    RunOptions o;
    o.fd = true;
    const Report r = run_checks(load_spec(spec_path("statistical_jj")), o);
    std::size_t reruns = 0;
    for (const auto& c : r.checks)
        if (c.full_name().rfind("fd.", 0) == 0 && c.name.find('.') != std::string::npos) ++reruns;
    CHECK(reruns >= 1);
    CHECK(r.exit_code() == 0);
}

TEST_CASE("command line") {
    const Run v = cli("validate " + spec_path("trivial_or"));
    CHECK(v.code == 0);
    CHECK(v.out.rfind("OK trivial_or", 0) == 0);

    const Run c = cli("check " + spec_path("trivial_or") + " --suite base --suite duality");
    CHECK(c.code == 0);
    CHECK(c.out.find("PASS duality.hat") != std::string::npos);
    CHECK(c.out.find("torsion.") == std::string::npos);

    const Run j = cli("report " + spec_path("trivial_or") + " --suite base");
    CHECK(j.code == 0);
    CHECK(json::parse(j.out)["spec"] == "trivial_or");

    json d = small_doc();
    const std::string failing = write_temp("gg_cli_fail.json", d.dump());
    const Run f = cli("check " + failing + " --format json");
    CHECK(f.code == 1);
    CHECK(f.out.find("\"witness\"") != std::string::npos);

    d["endomorphisms"]["J"][0][0] = "x +";
    const std::string broken = write_temp("gg_cli_syntax.json", d.dump());
    const Run e = cli("validate " + broken);
    CHECK(e.code == 2);
    CHECK(e.out.find("at position 3") != std::string::npos);

    CHECK(cli("check " + spec_path("trivial_or") + " --format xml").code == 2);
    CHECK(cli("frobnicate").code == 2);
}
