#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gengeom/connection.hpp"
#include "gengeom/expr.hpp"

namespace gg {

/// One builder invocation from the "structures" list. Arguments stay as JSON and are
/// resolved when the structure is built.
struct StructureDecl {
    std::string name;
    std::string builder;
    nlohmann::json args;
};

struct FamilyDecl {
    std::string family;
    std::string base;
    std::vector<std::pair<double, double>> params;
};

/// A parsed expression with the place it came from, kept for the derivative corpus.
struct SourceExpr {
    std::string where;
    std::string text;
    ExprPtr expr;
};

struct ManifoldSpec {
    std::string name;
    std::string path;
    int dim = 0;
    Chart chart;

    std::optional<BilinearField> metric;
    std::vector<std::pair<std::string, EndoField>> endomorphisms;
    std::vector<std::pair<std::string, CoVecMapField>> maps;

    std::string connection_kind = "flat";
    Connection connection;

    std::vector<StructureDecl> structures;
    std::vector<FamilyDecl> families;
    std::vector<double> alphas{-1.0, 0.0, 0.5, 1.0};

    std::vector<std::string> checks;
    int points = 32;
    std::uint64_t seed = 42;
    Tolerance tol{};

    /// "suite.check" -> "pass" | "fail"
    std::map<std::string, std::string> expect;

    std::vector<SourceExpr> expressions;

    const EndoField& endo(const std::string& name) const;
    const CoVecMapField& map(const std::string& name) const;
    const BilinearField& h() const;
    bool has_endo(const std::string& name) const;
    const StructureDecl* structure(const std::string& name) const;
};

/// Reads and validates a spec document. Errors: ParseError (malformed document or missing field),
/// UnknownReference (a builder names an undeclared endomorphism or structure), SyntaxError and
/// UnknownIdentifier from the expression parser.
ManifoldSpec load_spec(const std::string& path);
ManifoldSpec parse_spec(const nlohmann::json& doc, const std::string& path = "<memory>");

} // namespace gg
