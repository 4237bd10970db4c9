#include "gengeom/jet.hpp"

#include <cmath>
#include <sstream>

#include "gengeom/errors.hpp"

namespace gg {

namespace {

int dim_of(const Jet& a, const Jet& b) { return a.n > b.n ? a.n : b.n; }

// value f, derivative scale s: result partials are s * a.d
Jet chain(const Jet& a, double f, double s) {
    Jet r(f, a.n);
    for (int i = 0; i < a.n; ++i) r.d[i] = s * a.d[i];
    return r;
}

std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

SingularMetric::SingularMetric(std::vector<double> x, double det_)
    : GeomError("SingularMetric",
                [&] {
                    std::ostringstream os;
                    os.precision(10);
                    os << "|det h| = " << std::abs(det_) << " at (";
                    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
                    os << ")";
                    return os.str();
                }()),
      point(std::move(x)), det(det_) {}

Jet Jet::variable(double value, int index, int dim) {
    Jet j(value, dim);
    j.d[static_cast<std::size_t>(index)] = 1.0;
    return j;
}

bool Jet::is_constant() const {
    for (int i = 0; i < n; ++i)
        if (d[i] != 0.0) return false;
    return true;
}

Jet operator+(const Jet& a, const Jet& b) {
    Jet r(a.v + b.v, dim_of(a, b));
    for (int i = 0; i < r.n; ++i) r.d[i] = a.d[i] + b.d[i];
    return r;
}

Jet operator-(const Jet& a, const Jet& b) {
    Jet r(a.v - b.v, dim_of(a, b));
    for (int i = 0; i < r.n; ++i) r.d[i] = a.d[i] - b.d[i];
    return r;
}

Jet operator*(const Jet& a, const Jet& b) {
    Jet r(a.v * b.v, dim_of(a, b));
    for (int i = 0; i < r.n; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
}

Jet operator/(const Jet& a, const Jet& b) {
    if (b.v == 0.0) throw EvalError("division by zero");
    Jet r(a.v / b.v, dim_of(a, b));
    const double inv = 1.0 / b.v;
    for (int i = 0; i < r.n; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) * inv;
    return r;
}

Jet operator-(const Jet& a) { return chain(a, -a.v, -1.0); }

Jet operator+(const Jet& a, double b) {
    Jet r = a;
    r.v += b;
    return r;
}
Jet operator+(double a, const Jet& b) { return b + a; }
Jet operator-(const Jet& a, double b) { return a + (-b); }
Jet operator-(double a, const Jet& b) { return chain(b, a - b.v, -1.0); }
Jet operator*(const Jet& a, double b) { return chain(a, a.v * b, b); }
Jet operator*(double a, const Jet& b) { return chain(b, a * b.v, a); }
Jet operator/(const Jet& a, double b) {
    if (b == 0.0) throw EvalError("division by zero");
    return chain(a, a.v / b, 1.0 / b);
}

Jet& operator+=(Jet& a, const Jet& b) {
    a.v += b.v;
    if (b.n > a.n) a.n = b.n;
    for (int i = 0; i < a.n; ++i) a.d[i] += b.d[i];
    return a;
}

Jet& operator-=(Jet& a, const Jet& b) {
    a.v -= b.v;
    if (b.n > a.n) a.n = b.n;
    for (int i = 0; i < a.n; ++i) a.d[i] -= b.d[i];
    return a;
}

Jet pow(const Jet& a, const Jet& b) {
    if (b.is_constant()) {
        const double p = b.v;
        const bool integral = std::floor(p) == p;
        if (a.v < 0.0 && !integral)
            throw EvalError("non-integer power " + fmt_num(p) + " of negative base " + fmt_num(a.v));
        if (a.v == 0.0 && p < 0.0) throw EvalError("negative power of zero");
        const double f = std::pow(a.v, p);
        double s = 0.0;
        if (p != 0.0) {
            if (a.v == 0.0 && p < 1.0 && !a.is_constant())
                throw EvalError("power " + fmt_num(p) + " of zero is not differentiable");
            s = (a.v == 0.0 && p < 1.0) ? 0.0 : p * std::pow(a.v, p - 1.0);
        }
        Jet r = chain(a, f, s);
        r.n = dim_of(a, b);
        return r;
    }
    if (a.v <= 0.0) throw EvalError("variable exponent requires a positive base, got " + fmt_num(a.v));
    const double f = std::pow(a.v, b.v);
    const double la = std::log(a.v);
    Jet r(f, dim_of(a, b));
    for (int i = 0; i < r.n; ++i) r.d[i] = f * (b.d[i] * la + b.v * a.d[i] / a.v);
    return r;
}

Jet sin(const Jet& a) { return chain(a, std::sin(a.v), std::cos(a.v)); }
Jet cos(const Jet& a) { return chain(a, std::cos(a.v), -std::sin(a.v)); }

Jet exp(const Jet& a) {
    const double f = std::exp(a.v);
    if (!std::isfinite(f)) throw EvalError("exp overflow at " + fmt_num(a.v));
    return chain(a, f, f);
}

Jet log(const Jet& a) {
    if (a.v <= 0.0) throw EvalError("log of non-positive value " + fmt_num(a.v));
    return chain(a, std::log(a.v), 1.0 / a.v);
}

Jet sinh(const Jet& a) { return chain(a, std::sinh(a.v), std::cosh(a.v)); }
Jet cosh(const Jet& a) { return chain(a, std::cosh(a.v), std::sinh(a.v)); }

Jet tanh(const Jet& a) {
    const double t = std::tanh(a.v);
    return chain(a, t, 1.0 - t * t);
}

Jet sqrt(const Jet& a) {
    if (a.v < 0.0) throw EvalError("sqrt of negative value " + fmt_num(a.v));
    const double s = std::sqrt(a.v);
    if (s == 0.0) {
        if (!a.is_constant()) throw EvalError("sqrt is not differentiable at 0");
        return chain(a, 0.0, 0.0);
    }
    return chain(a, s, 0.5 / s);
}

std::vector<Jet> seed(std::span<const double> x) {
    const int n = static_cast<int>(x.size());
    if (n > kMaxDim) throw InvalidPoint("dimension " + std::to_string(n) + " exceeds " + std::to_string(kMaxDim));
    std::vector<Jet> out;
    out.reserve(x.size());
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(x[i])) throw InvalidPoint("coordinate " + std::to_string(i) + " is not finite");
        out.push_back(Jet::variable(x[i], i, n));
    }
    return out;
}

std::vector<Jet> constant_jets(std::span<const double> x) {
    const int n = static_cast<int>(x.size());
    if (n > kMaxDim) throw InvalidPoint("dimension " + std::to_string(n) + " exceeds " + std::to_string(kMaxDim));
    std::vector<Jet> out;
    out.reserve(x.size());
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(x[i])) throw InvalidPoint("coordinate " + std::to_string(i) + " is not finite");
        out.emplace_back(x[i], n);
    }
    return out;
}

std::vector<double> fd_gradient(const RealFunction& f, std::span<const double> x, double step) {
    std::vector<double> p(x.begin(), x.end());
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        p[i] = x[i] + step;
        const double fp = f(p);
        p[i] = x[i] - step;
        const double fm = f(p);
        p[i] = x[i];
        g[i] = (fp - fm) / (2.0 * step);
    }
    return g;
}

} // namespace gg
