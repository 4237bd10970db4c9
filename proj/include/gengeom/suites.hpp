#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gengeom/spec.hpp"

namespace gg {

enum class Status { Pass, Fail, Error };

std::string to_string(Status s);

struct CheckResult {
    std::string suite;
    std::string name;
    Status status = Status::Pass;
    double max_residual = 0.0;
    std::optional<Witness> witness;
    std::string expected;   // "fail" when the spec expects the identity to be violated
    bool recorded = false;  // informational: the residual is reported but never fails the run
    std::string message;    // error text
    std::string full_name() const { return suite + "." + name; }
};

struct Report {
    std::string spec;
    std::uint64_t seed = 0;
    int points = 0;
    std::vector<CheckResult> checks;
    std::vector<std::string> warnings;
    double wall_time_ms = 0.0;

    const CheckResult* find(const std::string& full_name) const;
    int exit_code() const;   // 0 all pass, 1 any fail, 2 any error
};

struct RunOptions {
    std::vector<std::string> suites;   // empty or "all": the spec's own list
    std::optional<int> points;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;         // overrides atol
    bool fd = false;
    bool force = false;
};

/// Every suite name the runner knows, in canonical order.
const std::vector<std::string>& known_suites();

Report run_checks(const ManifoldSpec& spec, const RunOptions& opts = {});

enum class Format { Text, Json };

void emit_report(const Report& r, Format f, std::ostream& out);

} // namespace gg
