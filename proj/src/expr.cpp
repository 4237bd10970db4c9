#include "gengeom/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "gengeom/errors.hpp"

namespace gg {

namespace {

ExprPtr make_number(double v) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Number;
    e->number = v;
    return e;
}

ExprPtr make_var(std::string name, int slot, double value) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Var;
    e->name = std::move(name);
    e->slot = slot;
    e->number = value;
    return e;
}

ExprPtr make_unary(std::string fn, ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Unary;
    e->name = std::move(fn);
    e->lhs = std::move(a);
    return e;
}

ExprPtr make_binary(char op, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Binary;
    e->op = op;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
}

bool is_builtin(const std::string& s) {
    for (const auto& f : builtin_functions())
        if (f == s) return true;
    return false;
}

class Parser {
public:
    Parser(std::string_view text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

    ExprPtr run() {
        skip();
        if (pos_ >= s_.size()) throw SyntaxError("empty expression", pos_);
        ExprPtr e = expr();
        skip();
        if (pos_ < s_.size()) throw SyntaxError(std::string("unexpected '") + s_[pos_] + "'", pos_);
        return e;
    }

private:
    std::string_view s_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    ExprPtr expr() {
        ExprPtr e = term();
        for (;;) {
            if (accept('+')) e = make_binary('+', e, term());
            else if (accept('-')) e = make_binary('-', e, term());
            else return e;
        }
    }

    ExprPtr term() {
        ExprPtr e = factor();
        for (;;) {
            if (accept('*')) e = make_binary('*', e, factor());
            else if (accept('/')) e = make_binary('/', e, factor());
            else return e;
        }
    }

    // unary minus binds looser than '^': -x^2 = -(x^2), while 2^-1 is still accepted
    ExprPtr factor() {
        if (accept('-')) return make_unary("-", factor());
        ExprPtr b = base();
        if (accept('^')) return make_binary('^', b, factor());
        return b;
    }

    ExprPtr base() {
        skip();
        if (pos_ >= s_.size()) throw SyntaxError("unexpected end of input", pos_);
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            ExprPtr e = expr();
            if (!accept(')')) throw SyntaxError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident();
        throw SyntaxError(std::string("unexpected '") + c + "'", pos_);
    }

    ExprPtr number() {
        const std::size_t start = pos_;
        bool digits = false;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_, digits = true;
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_, digits = true;
        }
        if (!digits) throw SyntaxError("malformed number", start);
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
            if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
                while (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) ++p;
                pos_ = p;
            }
        }
        const std::string lit(s_.substr(start, pos_ - start));
        return make_number(std::strtod(lit.c_str(), nullptr));
    }

    ExprPtr ident() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        std::string name(s_.substr(start, pos_ - start));
        skip();
        if (pos_ < s_.size() && s_[pos_] == '(') {
            if (!is_builtin(name)) throw UnknownIdentifier("unknown function '" + name + "'");
            ++pos_;
            ExprPtr arg = expr();
            if (!accept(')')) throw SyntaxError("expected ')'", pos_);
            return make_unary(name, arg);
        }
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i] == name) return make_var(name, static_cast<int>(i), 0.0);
        if (name == "pi") return make_var(name, -1, std::numbers::pi);
        if (name == "e") return make_var(name, -1, std::numbers::e);
        throw UnknownIdentifier("unknown identifier '" + name + "'");
    }
};

template <class T, class Leaf>
T eval_impl(const Expr& e, const Leaf& leaf, int n) {
    using std::cos, std::exp, std::log, std::sin, std::sinh, std::cosh, std::tanh, std::sqrt;
    switch (e.kind) {
    case Expr::Kind::Number:
        if constexpr (std::is_same_v<T, Jet>) return Jet::constant(e.number, n);
        else return e.number;
    case Expr::Kind::Var:
        return leaf(e);
    case Expr::Kind::Unary: {
        const T a = eval_impl<T>(*e.lhs, leaf, n);
        const std::string& f = e.name;
        if (f == "-") return -a;
        if (f == "sin") return sin(a);
        if (f == "cos") return cos(a);
        if (f == "exp") return exp(a);
        if (f == "sinh") return sinh(a);
        if (f == "cosh") return cosh(a);
        if (f == "tanh") return tanh(a);
        if constexpr (std::is_same_v<T, Jet>) {
            if (f == "log") return log(a);
            if (f == "sqrt") return sqrt(a);
        } else {
            if (f == "log") {
                if (a <= 0.0) throw EvalError("log of non-positive value");
                return log(a);
            }
            if (f == "sqrt") {
                if (a < 0.0) throw EvalError("sqrt of negative value");
                return sqrt(a);
            }
        }
        throw UnknownIdentifier("unknown function '" + f + "'");
    }
    case Expr::Kind::Binary: {
        const T a = eval_impl<T>(*e.lhs, leaf, n);
        const T b = eval_impl<T>(*e.rhs, leaf, n);
        switch (e.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/':
            if constexpr (std::is_same_v<T, double>)
                if (b == 0.0) throw EvalError("division by zero");
            return a / b;
        case '^':
            if constexpr (std::is_same_v<T, Jet>) return pow(a, b);
            else {
                if (a < 0.0 && std::floor(b) != b) throw EvalError("non-integer power of negative base");
                if (a == 0.0 && b < 0.0) throw EvalError("negative power of zero");
                return std::pow(a, b);
            }
        }
        throw EvalError(std::string("unknown operator '") + e.op + "'");
    }
    }
    throw EvalError("corrupt expression");
}

std::string number_text(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

const std::vector<std::string>& builtin_functions() {
    static const std::vector<std::string> f = {"sin", "cos", "exp", "log", "sinh", "cosh", "tanh", "sqrt"};
    return f;
}

ExprPtr parse(std::string_view text, const std::vector<std::string>& allowed_vars) {
    return Parser(text, allowed_vars).run();
}

Jet eval(const Expr& e, std::span<const Jet> coords) {
    const int n = coords.empty() ? 0 : coords[0].n;
    auto leaf = [&](const Expr& v) -> Jet {
        if (v.slot < 0) return Jet::constant(v.number, n);
        if (static_cast<std::size_t>(v.slot) >= coords.size())
            throw EvalError("unbound variable '" + v.name + "'");
        return coords[static_cast<std::size_t>(v.slot)];
    };
    return eval_impl<Jet>(e, leaf, n);
}

Jet eval(const Expr& e, const std::map<std::string, Jet>& env) {
    const int n = env.empty() ? 0 : env.begin()->second.n;
    auto leaf = [&](const Expr& v) -> Jet {
        auto it = env.find(v.name);
        if (it != env.end()) return it->second;
        if (v.slot < 0) return Jet::constant(v.number, n);
        throw EvalError("unbound variable '" + v.name + "'");
    };
    return eval_impl<Jet>(e, leaf, n);
}

double eval_real(const Expr& e, std::span<const double> coords) {
    auto leaf = [&](const Expr& v) -> double {
        if (v.slot < 0) return v.number;
        if (static_cast<std::size_t>(v.slot) >= coords.size())
            throw EvalError("unbound variable '" + v.name + "'");
        return coords[static_cast<std::size_t>(v.slot)];
    };
    return eval_impl<double>(e, leaf, 0);
}

std::string print(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::Number: return number_text(e.number);
    case Expr::Kind::Var: return e.name;
    case Expr::Kind::Unary:
        if (e.name == "-") return "(-" + print(*e.lhs) + ")";
        return e.name + "(" + print(*e.lhs) + ")";
    case Expr::Kind::Binary:
        return "(" + print(*e.lhs) + " " + e.op + " " + print(*e.rhs) + ")";
    }
    return "";
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case Expr::Kind::Number: return a.number == b.number;
    case Expr::Kind::Var: return a.name == b.name && a.slot == b.slot;
    case Expr::Kind::Unary: return a.name == b.name && structurally_equal(*a.lhs, *b.lhs);
    case Expr::Kind::Binary:
        return a.op == b.op && structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
    }
    return false;
}

bool is_constant_expr(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::Number: return true;
    case Expr::Kind::Var: return e.slot < 0;
    case Expr::Kind::Unary: return is_constant_expr(*e.lhs);
    case Expr::Kind::Binary: return is_constant_expr(*e.lhs) && is_constant_expr(*e.rhs);
    }
    return false;
}

} // namespace gg
