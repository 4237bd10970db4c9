#include <doctest.h>

#include "gengeom/connection.hpp"
#include "gengeom/errors.hpp"
#include "oracles.hpp"

using namespace gg;
using namespace oracle;

namespace {

Vec pt_vec(const VectorField& F, const Point& p) { return value_at(F, p); }

} // namespace

TEST_CASE("flat connection kills constant fields") {
    const Connection c = flat_connection(2);
    const VectorField Y = constant_vector(Vec::Ones(2));
    CHECK(inf(cov_deriv(c, Y, Vec::Unit(2, 0), {0.3, 0.1})) == 0.0);
    CHECK(inf(torsion(c, Y, vfield({"x", "y"}, 2), {0.3, 0.1})) == 0.0);
}

TEST_CASE("covariant derivatives against finite differences") {
    const Connection c = twisted();
    const Point x{0.4, 0.7};
    const Vec X = (Vec(2) << 0.3, -1.2).finished();
    const VectorField Y = vfield({"x*y", "cos(y)"}, 2);
    const Christoffel g = c.gamma(x);

    auto val = [](const VectorField& F) { return [F](const Point& p) { return pt_vec(F, p); }; };
    Vec expect = fd_jacobian(val(Y), x) * X;
    for (int i = 0; i < 2; ++i) expect += X[i] * g.G[static_cast<std::size_t>(i)] * value_at(Y, x);
    CHECK(inf(Vec(cov_deriv(c, Y, X, x) - expect)) <= 1e-8);

    // covector: (nabla_X eta)_j = X^i d_i eta_j - X^i Gamma^k_{ij} eta_k
    Vec cexp = fd_jacobian(val(Y), x) * X;
    for (int i = 0; i < 2; ++i) cexp -= X[i] * g.G[static_cast<std::size_t>(i)].transpose() * value_at(Y, x);
    CHECK(inf(Vec(cov_deriv_covector(c, Y, X, x) - cexp)) <= 1e-8);

    // endomorphism: (nabla_X J) Z = nabla_X (J Z) - J nabla_X Z for constant Z
    const EndoField J{mfield({{"x", "y^2"}, {"1", "sin(x)"}}, 2)};
    for (int k = 0; k < 2; ++k) {
        const VectorField Z = basis_vector(k, 2);
        const Vec lhs = cov_deriv(c, J, X, x) * Vec::Unit(2, k);
        const Vec rhs = cov_deriv(c, apply(J.m, Z), X, x) - value_at(J.m, x) * cov_deriv(c, Z, X, x);
        CHECK(inf(Vec(lhs - rhs)) <= 1e-13);
    }

    // bilinear: (nabla_X h)(e_j, e_k) = X(h_jk) - h(nabla_X e_j, e_k) - h(e_j, nabla_X e_k)
    const BilinearField h = curved_metric();
    Mat hexp = Mat::Zero(2, 2);
    for (int i = 0; i < 2; ++i)
        hexp += X[i] * fd_partial([&](const Point& p) { return value_at(h.m, p); }, x, i);
    for (int i = 0; i < 2; ++i) {
        const Mat& G = g.G[static_cast<std::size_t>(i)];
        hexp -= X[i] * (G.transpose() * value_at(h.m, x) + value_at(h.m, x) * G);
    }
    CHECK(inf(Mat(cov_deriv(c, h, X, x) - hexp)) <= 1e-8);
}

TEST_CASE("torsion") {
    const Connection c = twisted();
    const VectorField X = vfield({"1 + y", "x"}, 2), Y = vfield({"y^2", "exp(x)"}, 2);
    const Point x{0.2, -0.5};
    const Vec defining = cov_deriv(c, Y, value_at(X, x), x) - cov_deriv(c, X, value_at(Y, x), x) - lie_bracket(X, Y, x);
    CHECK(inf(Vec(torsion(c, X, Y, x) - defining)) <= 1e-13);
    CHECK(inf(Vec(torsion_formula(c, value_at(X, x), value_at(Y, x), x) - defining)) <= 1e-13);
    CHECK(inf(torsion(c, X, X, x)) <= 1e-15);
    CHECK(inf(torsion(flat_connection(2), X, Y, x)) <= 1e-15);
}

TEST_CASE("d^nabla h") {
    const Connection c = twisted();
    const BilinearField h = curved_metric();
    Rng rng(11);
    const Point x{0.1, 0.6};
    for (int k = 0; k < 8; ++k) {
        const Vec X = rng.vector(2), Y = rng.vector(2), Z = rng.vector(2);
        CHECK(d_nabla_h(c, h, X, Y, Z, x) == doctest::Approx(-d_nabla_h(c, h, Y, X, Z, x)).epsilon(1e-12));
    }
    const Connection lc = levi_civita(h, 2);
    for (int k = 0; k < 8; ++k) {
        const Vec X = rng.vector(2), Y = rng.vector(2), Z = rng.vector(2);
        CHECK(std::abs(d_nabla_h(lc, h, X, Y, Z, x)) <= 1e-13);
    }
}

TEST_CASE("Levi-Civita connection is metric and torsion-free") {
    const BilinearField h = curved_metric();
    const Connection lc = levi_civita(h, 2);
    const Sampler s(chart(2), 16, 3);
    CHECK(is_parallel(lc, h, s));
    CHECK(is_quasi_statistical(lc, h, s));
    const VectorField X = vfield({"x", "1"}, 2), Y = vfield({"y", "x*y"}, 2);
    for (const auto& p : s.points()) CHECK(inf(torsion(lc, X, Y, p)) <= 1e-14);
}

TEST_CASE("flat connection of a curved metric is not quasi-statistical") {
    const BilinearField h{mfield({{"1", "0"}, {"0", "x"}}, 2)};
    const Sampler s(Chart{2, {"x", "y"}, {{1, 2}, {-1, 1}}}, 16, 3);
    CHECK_FALSE(is_quasi_statistical(flat_connection(2), h, s));
}

TEST_CASE("dual connection") {
    const Connection c = twisted();
    const BilinearField h = curved_metric();
    const Sampler s(chart(2), 8, 9);
    const Connection d = dual_connection(c, h, &s);
    // X h(Y, Z) = h(nabla_X Y, Z) + h(Y, nabla*_X Z)
    const VectorField Y = vfield({"x*y", "1"}, 2), Z = vfield({"cos(x)", "y"}, 2);
    for (const auto& p : s.points()) {
        const Vec X = (Vec(2) << 0.7, -0.2).finished();
        auto hyz = [&](const Point& q) {
            return Vec::Constant(1, value_at(Y, q).dot(value_at(h.m, q) * value_at(Z, q)));
        };
        const double lhs = (fd_jacobian(hyz, p) * X)(0);
        const Mat hp = value_at(h.m, p);
        const double rhs = cov_deriv(c, Y, X, p).dot(hp * value_at(Z, p)) + value_at(Y, p).dot(hp * cov_deriv(d, Z, X, p));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-7));
    }
    CHECK(christoffel_distance(dual_connection(d, h), c, s) <= 1e-12);
    CHECK(christoffel_distance(dual_connection(levi_civita(h, 2), h), levi_civita(h, 2), s) <= 1e-12);
}

TEST_CASE("parallel fields") {
    const Sampler s(chart(2), 8, 5);
    const Connection flat = flat_connection(2);
    CHECK(is_parallel(flat, EndoField{mfield({{"0", "-1"}, {"1", "0"}}, 2)}, s));
    CHECK_FALSE(is_parallel(flat, EndoField{mfield({{"cos(y)", "sin(y)"}, {"sin(y)", "-cos(y)"}}, 2)}, s));
    CHECK(is_parallel(flat, constant_vector(Vec::Ones(2)), s));
    CHECK_FALSE(is_parallel(twisted(), constant_vector(Vec::Ones(2)), s));
}
