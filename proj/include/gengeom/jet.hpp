#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace gg {

/// Largest chart dimension supported by the jet storage.
inline constexpr int kMaxDim = 8;

/// A value together with its first partial derivatives with respect to the chart coordinates.
struct Jet {
    double v = 0.0;
    std::array<double, kMaxDim> d{};
    int n = 0;

    Jet() = default;
    Jet(double value, int dim) : v(value), n(dim) {}

    static Jet constant(double value, int dim) { return Jet(value, dim); }
    static Jet variable(double value, int index, int dim);

    double partial(int i) const { return d[static_cast<std::size_t>(i)]; }
    bool is_constant() const;
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator-(const Jet& a);

Jet operator+(const Jet& a, double b);
Jet operator+(double a, const Jet& b);
Jet operator-(const Jet& a, double b);
Jet operator-(double a, const Jet& b);
Jet operator*(const Jet& a, double b);
Jet operator*(double a, const Jet& b);
Jet operator/(const Jet& a, double b);

Jet& operator+=(Jet& a, const Jet& b);
Jet& operator-=(Jet& a, const Jet& b);

Jet pow(const Jet& a, const Jet& b);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sinh(const Jet& a);
Jet cosh(const Jet& a);
Jet tanh(const Jet& a);
Jet sqrt(const Jet& a);

/// Jets for the coordinates of x: value x_i, partials e_i.
std::vector<Jet> seed(std::span<const double> x);

/// Jets for the coordinates of x with all partials zero.
std::vector<Jet> constant_jets(std::span<const double> x);

using RealFunction = std::function<double(std::span<const double>)>;

/// Central differences (f(x+h e_i) - f(x-h e_i)) / 2h.
std::vector<double> fd_gradient(const RealFunction& f, std::span<const double> x, double step = 1e-5);

} // namespace gg
