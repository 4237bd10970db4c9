#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gengeom/jet.hpp"

namespace gg {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// AST node of the field-definition language.
struct Expr {
    enum class Kind { Number, Var, Unary, Binary };

    Kind kind = Kind::Number;
    double number = 0.0;   // Number
    std::string name;      // Var name, or Unary function name ("-" for negation)
    int slot = -1;         // Var: coordinate index, -1 for the constants pi and e
    char op = 0;           // Binary: one of + - * / ^
    ExprPtr lhs, rhs;      // Unary uses lhs only
};

/// Function names accepted in calls.
const std::vector<std::string>& builtin_functions();

ExprPtr parse(std::string_view text, const std::vector<std::string>& allowed_vars);

/// Evaluate with coordinate jets indexed by slot.
Jet eval(const Expr& e, std::span<const Jet> coords);

/// Evaluate with a name-keyed environment.
Jet eval(const Expr& e, const std::map<std::string, Jet>& env);

/// Plain double evaluation, used as the reference for jet values.
double eval_real(const Expr& e, std::span<const double> coords);

/// Fully parenthesized canonical form; parse(print(e)) is structurally equal to e.
std::string print(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

/// True when the expression contains no coordinate variables.
bool is_constant_expr(const Expr& e);

} // namespace gg
