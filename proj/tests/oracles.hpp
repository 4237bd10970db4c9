#pragma once

// Helpers shared by the unit tests. Everything here works on plain doubles so it can
// serve as an oracle for the jet-based library code.

#include <functional>
#include <string>
#include <vector>

#include "gengeom/connection.hpp"
#include "gengeom/expr.hpp"
#include "gengeom/fields.hpp"
#include "gengeom/generalized.hpp"

namespace oracle {

using gg::Mat;
using gg::Point;
using gg::Vec;

inline const std::vector<std::string>& vars2() {
    static const std::vector<std::string> v{"x", "y"};
    return v;
}
inline const std::vector<std::string>& vars4() {
    static const std::vector<std::string> v{"x", "y", "z", "w"};
    return v;
}

inline gg::MatrixField mfield(const std::vector<std::vector<std::string>>& rows, int n) {
    const auto& vars = n == 2 ? vars2() : vars4();
    std::vector<std::vector<gg::ExprPtr>> e;
    for (const auto& r : rows) {
        e.emplace_back();
        for (const auto& s : r) e.back().push_back(gg::parse(s, vars));
    }
    return gg::matrix_field(e);
}

inline gg::VectorField vfield(const std::vector<std::string>& comps, int n) {
    const auto& vars = n == 2 ? vars2() : vars4();
    std::vector<gg::ExprPtr> e;
    for (const auto& s : comps) e.push_back(gg::parse(s, vars));
    return gg::vector_field(e);
}

inline gg::Chart chart(int n, double lo = -1.0, double hi = 1.0) {
    gg::Chart c;
    c.dim = n;
    c.coords = n == 2 ? vars2() : vars4();
    for (int i = 0; i < n; ++i) c.box.emplace_back(lo, hi);
    return c;
}

/// Central-difference Jacobian of a vector valued map of the point: column i is d/dx_i.
inline Mat fd_jacobian(const std::function<Vec(const Point&)>& f, const Point& x, double h = 1e-6) {
    const Vec f0 = f(x);
    Mat J(f0.size(), static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        Point a = x, b = x;
        a[i] += h;
        b[i] -= h;
        J.col(static_cast<Eigen::Index>(i)) = (f(a) - f(b)) / (2.0 * h);
    }
    return J;
}

inline Mat fd_partial(const std::function<Mat(const Point&)>& f, const Point& x, int i, double h = 1e-6) {
    Point a = x, b = x;
    a[static_cast<std::size_t>(i)] += h;
    b[static_cast<std::size_t>(i)] -= h;
    return (f(a) - f(b)) / (2.0 * h);
}

inline double inf(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }
inline double inf(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

/// Dense 2n x 2n matrix of a block operator given numerically.
inline Mat blocks(const Mat& A, const Mat& B, const Mat& C, const Mat& D) {
    const auto n = A.rows();
    Mat m(2 * n, 2 * n);
    m << A, B, C, D;
    return m;
}

// Left multiplication by i and j on the quaternions, coordinates (1, i, j, k).
inline Mat quat_i() {
    Mat m(4, 4);
    m << 0, -1, 0, 0, 1, 0, 0, 0, 0, 0, 0, -1, 0, 0, 1, 0;
    return m;
}
inline Mat quat_j() {
    Mat m(4, 4);
    m << 0, 0, -1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, -1, 0, 0;
    return m;
}

inline Mat mat2(double a, double b, double c, double d) {
    Mat m(2, 2);
    m << a, b, c, d;
    return m;
}

/// Gamma^0_{01} = x, Gamma^1_{10} = y^2, Gamma^0_{11} = sin(x): curved, with torsion.
inline gg::Connection twisted() {
    const gg::ExprPtr z = gg::parse("0", {});
    std::vector<std::vector<std::vector<gg::ExprPtr>>> t(2, std::vector<std::vector<gg::ExprPtr>>(2, std::vector<gg::ExprPtr>(2, z)));
    t[0][0][1] = gg::parse("x", vars2());
    t[1][1][0] = gg::parse("y^2", vars2());
    t[0][1][1] = gg::parse("sin(x)", vars2());
    return gg::christoffel_connection(2, t);
}

inline gg::BilinearField curved_metric() {
    return gg::BilinearField{mfield({{"exp(x)", "0.2*y"}, {"0.2*y", "2 + sin(y)"}}, 2)};
}

/// Oracle for nabla_X Y: FD Jacobian plus the Christoffel term.
inline Vec cov_oracle(const gg::Connection& c, const std::function<Vec(const Point&)>& Y, const Vec& X, const Point& x) {
    Vec r = fd_jacobian(Y, x) * X;
    const gg::Christoffel g = c.gamma(x);
    for (int i = 0; i < X.size(); ++i) r += X[i] * g.G[static_cast<std::size_t>(i)] * Y(x);
    return r;
}
/// Oracle for nabla_X eta on a covector.
inline Vec cov_covector_oracle(const gg::Connection& c, const std::function<Vec(const Point&)>& eta, const Vec& X,
                               const Point& x) {
    Vec r = fd_jacobian(eta, x) * X;
    const gg::Christoffel g = c.gamma(x);
    for (int i = 0; i < X.size(); ++i) r -= X[i] * g.G[static_cast<std::size_t>(i)].transpose() * eta(x);
    return r;
}

} // namespace oracle
