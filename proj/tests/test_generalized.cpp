#include <doctest.h>

#include "gengeom/generalized.hpp"
#include "oracles.hpp"

using namespace gg;
using namespace oracle;

namespace {

std::function<Vec(const Point&)> eval(const VectorField& f) {
    return [f](const Point& p) { return value_at(f, p); };
}

Vec top(const Vec& v) { return v.head(v.size() / 2); }
Vec bottom(const Vec& v) { return v.tail(v.size() / 2); }

const Point kP{0.35, -0.4};

} // namespace

TEST_CASE("generalized metric pairs tangent with tangent and covector with covector") {
    const BilinearField id{constant_matrix(Mat::Identity(2, 2))};
    const Vec s = (Vec(4) << 1, 0, 1, 0).finished();
    CHECK(gen_metric(id, s, s, kP) == doctest::Approx(2.0));
    CHECK(gen_metric(id, (Vec(4) << 1, 0, 0, 0).finished(), (Vec(4) << 0, 0, 1, 0).finished(), kP) == 0.0);

    const BilinearField h = curved_metric();
    const Mat hx = value_at(h.m, kP), hi = hx.inverse();
    Rng rng(3);
    const Vec a = rng.vector(4), b = rng.vector(4);
    const double expect = top(a).dot(hx * top(b)) + (hi * bottom(a)).dot(hx * (hi * bottom(b)));
    CHECK(gen_metric(h, a, b, kP) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("operators match dense block matrices") {
    const GenOperator P = block_operator(2, mfield({{"x", "1"}, {"y", "0"}}, 2), mfield({{"0", "sin(x)"}, {"1", "y"}}, 2),
                                         mfield({{"2", "x*y"}, {"0", "1"}}, 2), mfield({{"cos(y)", "0"}, {"x", "3"}}, 2));
    const GenOperator Q = block_operator(2, mfield({{"1", "y"}, {"0", "1"}}, 2), constant_matrix(Mat::Zero(2, 2)),
                                         mfield({{"exp(x)", "0"}, {"0", "1"}}, 2), mfield({{"1", "0"}, {"y", "-1"}}, 2));
    const Mat p = matrix(P, kP), q = matrix(Q, kP);
    CHECK(inf(Mat(p.topLeftCorner(2, 2) - mat2(kP[0], 1, kP[1], 0))) == 0.0);
    CHECK(inf(Mat(matrix(compose(P, Q), kP) - p * q)) <= 1e-14);
    CHECK(inf(Mat(matrix(combine(2.0, P, -0.5, Q), kP) - (2.0 * p - 0.5 * q))) <= 1e-14);
    CHECK(inf(Mat(matrix(negate(P), kP) + p)) == 0.0);
    CHECK(inf(Mat(matrix(identity_operator(2), kP) - Mat::Identity(4, 4))) == 0.0);

    Rng rng(5);
    const GField s = random_section(rng, 2);
    CHECK(inf(Vec(value_at(apply(P, s), kP) - p * value_at(s, kP))) <= 1e-14);
    // apply is a field: its derivative is the product rule
    const Mat lhs = fd_jacobian(eval(apply(P, s)), kP);
    const Mat rhs = p * fd_jacobian(eval(s), kP);
    Mat dp(4, 2);
    for (int i = 0; i < 2; ++i)
        dp.col(i) = fd_partial([&](const Point& x) { return matrix(P, x); }, kP, i) * value_at(s, kP);
    CHECK(inf(Mat(lhs - rhs - dp)) <= 1e-7);
}

TEST_CASE("cached operator evaluation agrees with fresh evaluation") {
    const GenOperator P = block_operator(2, mfield({{"x", "1"}, {"y", "0"}}, 2), mfield({{"0", "sin(x)"}, {"1", "y"}}, 2),
                                         mfield({{"2", "x*y"}, {"0", "1"}}, 2), mfield({{"cos(y)", "0"}, {"x", "3"}}, 2));
    const Sampler s(chart(2), 10, 1);
    std::vector<Mat> first;
    for (const auto& p : s.points()) first.push_back(matrix(P, p));
    for (int round = 0; round < 3; ++round)
        for (std::size_t k = 0; k < s.points().size(); ++k) CHECK(inf(Mat(matrix(P, s.points()[k]) - first[k])) == 0.0);

    Rng rng(8);
    const GField f = random_section(rng, 2);
    const GField m = memoize(f);
    for (const auto& p : s.points()) {
        CHECK(inf(Vec(value_at(m, p) - value_at(f, p))) == 0.0);
        CHECK(inf(Mat(fd_jacobian(eval(m), p) - fd_jacobian(eval(f), p))) == 0.0);
    }
}

TEST_CASE("sections") {
    CHECK(inf(Vec(value_at(frame_section(3, 2), kP) - Vec::Unit(4, 3))) == 0.0);
    Rng a(17), b(17);
    const GField s = random_section(a, 2), t = random_section(b, 2);
    CHECK(inf(Vec(value_at(s, kP) - value_at(t, kP))) == 0.0);
    CHECK(inf(fd_jacobian(eval(s), kP)) > 1e-3);
    const VectorField X = vfield({"x", "y^2"}, 2), eta = vfield({"1", "sin(x)"}, 2);
    CHECK(inf(Vec(value_at(section(X, eta), kP) - (Vec(4) << kP[0], kP[1] * kP[1], 1, std::sin(kP[0])).finished())) <= 1e-15);
    CHECK(inf(Vec(value_at(subtract(s, scale(2.0, s)), kP) + value_at(s, kP))) <= 1e-15);
}

TEST_CASE("bracket twisted by a connection") {
    const Connection c = twisted();
    const VectorField X = vfield({"x*y", "1"}, 2), Y = vfield({"cos(x)", "y"}, 2);
    const VectorField eta = vfield({"y", "x^2"}, 2), beta = vfield({"exp(y)", "x"}, 2);
    const GField s = section(X, eta), t = section(Y, beta);
    const Vec got = nabla_bracket(c, s, t, kP);
    CHECK(inf(Vec(top(got) - lie_bracket(X, Y, kP))) <= 1e-13);
    const Vec cov = cov_covector_oracle(c, eval(beta), value_at(X, kP), kP) -
                    cov_covector_oracle(c, eval(eta), value_at(Y, kP), kP);
    CHECK(inf(Vec(bottom(got) - cov)) <= 1e-8);
    CHECK(inf(Vec(nabla_bracket(c, s, t, kP) + nabla_bracket(c, t, s, kP))) <= 1e-14);
}

TEST_CASE("hat connection and its dual") {
    const Connection c = twisted();
    const BilinearField h = curved_metric();
    const GenConnection D = hat_connection(c, h), Ds = hat_dual(c, h);
    const VectorField X = vfield({"x*y", "1"}, 2), eta = vfield({"y", "x^2"}, 2);
    const VectorField Y = vfield({"cos(x)", "y"}, 2), beta = vfield({"exp(y)", "x"}, 2);
    const GField s = section(X, eta), t = section(Y, beta);
    const Vec Xv = value_at(X, kP);
    const Mat hx = value_at(h.m, kP);

    auto hinv_beta = [&](const Point& p) -> Vec { return value_at(h.m, p).inverse() * value_at(beta, p); };
    auto h_Y = [&](const Point& p) -> Vec { return value_at(h.m, p) * value_at(Y, p); };

    const Vec d = D(s, t, kP);
    CHECK(inf(Vec(top(d) - cov_oracle(c, eval(Y), Xv, kP))) <= 1e-8);
    CHECK(inf(Vec(bottom(d) - hx * cov_oracle(c, hinv_beta, Xv, kP))) <= 1e-7);

    const Vec ds = Ds(s, t, kP);
    CHECK(inf(Vec(top(ds) - hx.inverse() * cov_covector_oracle(c, h_Y, Xv, kP))) <= 1e-7);
    CHECK(inf(Vec(bottom(ds) - cov_covector_oracle(c, eval(beta), Xv, kP))) <= 1e-8);

    // value of sigma at the point is all that matters
    const GField s2 = add(constant_section(value_at(s, kP)), scale(scalar_field(parse("(x-0.35)^2", vars2())), s));
    CHECK(inf(Vec(D(s2, t, kP) - d)) <= 1e-13);

    CHECK(inf(Vec(alpha_connection(D, Ds, 1.0)(s, t, kP) - d)) <= 1e-15);
    CHECK(inf(Vec(alpha_connection(D, Ds, -1.0)(s, t, kP) - ds)) <= 1e-15);
    CHECK(inf(Vec(alpha_connection(D, Ds, 0.5)(s, t, kP) - (0.75 * d + 0.25 * ds))) <= 1e-14);
}

TEST_CASE("duality of generalized connections") {
    const Connection c = twisted();
    const BilinearField h = curved_metric();
    const Sampler s(chart(2), 8, 4);
    const Tolerance tol{1e-8, 1e-8};
    CHECK(duality_check(hat_connection(c, h), hat_dual(c, h), h, 2, s, tol).ok);
    CHECK(duality_check(hat_dual(c, h), hat_connection(c, h), h, 2, s, tol).ok);
    CHECK_FALSE(duality_check(trivial_connection(), trivial_connection(), h, 2, s, tol).ok);
    // a constant metric with the trivial connection is self dual
    const BilinearField k{constant_matrix(mat2(2, 0.5, 0.5, 1))};
    CHECK(duality_check(trivial_connection(), trivial_connection(), k, 2, s, tol).ok);

    // X h^(t, r) against the FD derivative of the pairing for random sections
    Rng rng(12);
    const GField t = random_section(rng, 2), r = random_section(rng, 2), sg = random_section(rng, 2);
    const GenConnection D = hat_connection(c, h), Ds = hat_dual(c, h);
    for (const auto& p : s.points()) {
        auto pair = [&](const Point& q) { return Vec::Constant(1, gen_metric(h, value_at(t, q), value_at(r, q), q)); };
        const double lhs = (fd_jacobian(pair, p) * top(value_at(sg, p)))(0);
        const double rhs = gen_metric(h, D(sg, t, p), value_at(r, p), p) + gen_metric(h, value_at(t, p), Ds(sg, r, p), p);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-7));
    }
}

TEST_CASE("torsion closed forms") {
    const Connection c = twisted();
    const BilinearField h = curved_metric();
    const GenConnection D = hat_connection(c, h), Ds = hat_dual(c, h);
    Rng rng(21);
    const Sampler smp(chart(2), 6, 2);
    for (int k = 0; k < 3; ++k) {
        const GField s = random_section(rng, 2), t = random_section(rng, 2);
        for (const auto& p : smp.points()) {
            const Vec sv = value_at(s, p), tv = value_at(t, p);
            CHECK(inf(Vec(gen_torsion(D, c, s, t, p) - hat_torsion_formula(c, h, sv, tv, p))) <= 1e-10);
            CHECK(inf(Vec(gen_torsion(Ds, c, s, t, p) - hat_dual_torsion_formula(c, h, sv, tv, p))) <= 1e-10);
        }
    }
    // tangent part is the torsion of the base connection
    const GField s = section(vfield({"x", "1"}, 2), vfield({"0", "0"}, 2));
    const GField t = section(vfield({"y^2", "x"}, 2), vfield({"0", "0"}, 2));
    const Vec T = torsion(c, vfield({"x", "1"}, 2), vfield({"y^2", "x"}, 2), kP);
    CHECK(inf(Vec(top(gen_torsion(D, c, s, t, kP)) - T)) <= 1e-12);
    // Levi-Civita: the hat connection is torsion free
    const Connection lc = levi_civita(h, 2);
    const Sampler s2(chart(2), 6, 3);
    CHECK(frame_check(s2, 2, Tolerance{1e-9, 0}, [&](const GField& a, const GField& b, const Point& p) {
              return gen_torsion(hat_connection(lc, h), lc, a, b, p);
          }, "torsion").ok);
}

TEST_CASE("generalized Nijenhuis tensor") {
    const Connection flat = flat_connection(2);
    const Sampler s(chart(2), 6, 7);

    const GenOperator K = block_operator(2, constant_matrix(mat2(0, -1, 1, 0)), constant_matrix(Mat::Zero(2, 2)),
                                         constant_matrix(Mat::Zero(2, 2)), constant_matrix(mat2(0, -1, 1, 0)));
    CHECK(is_integrable(K, flat, s));

    // diag(J, -J*) restricted to tangent sections reproduces the Nijenhuis tensor of J
    const MatrixField Jm = mfield({{"x", "y^2"}, {"1", "sin(x)"}}, 2);
    const MatrixField mJt = [Jm](const JetPoint& p) { return -transpose(Jm(p)); };
    const GenOperator Jh = block_operator(2, Jm, constant_matrix(Mat::Zero(2, 2)), constant_matrix(Mat::Zero(2, 2)), mJt);
    const VectorField X = vfield({"x", "1"}, 2), Y = vfield({"y", "x*y"}, 2), z = vfield({"0", "0"}, 2);
    const Vec N = gen_nijenhuis(Jh, flat, section(X, z), section(Y, z), kP);
    CHECK(inf(Vec(top(N) - nijenhuis_J(EndoField{Jm}, X, Y, kP))) <= 1e-12);
    CHECK(inf(bottom(N)) <= 1e-12);
    CHECK_FALSE(is_integrable(Jh, flat, s));

    // tensorial: rescaling a section by f rescales N
    Rng rng(2);
    const GField a = random_section(rng, 2), b = random_section(rng, 2);
    const ScalarField f = scalar_field(parse("2 + sin(x*y)", vars2()));
    const Vec lhs = gen_nijenhuis(Jh, flat, scale(f, a), b, kP);
    CHECK(inf(Vec(lhs - value_at(f, kP) * gen_nijenhuis(Jh, flat, a, b, kP))) <= 1e-10);
}

TEST_CASE("covariant derivative of an operator") {
    const GenOperator P = block_operator(2, mfield({{"x", "1"}, {"y", "0"}}, 2), mfield({{"0", "sin(x)"}, {"1", "y"}}, 2),
                                         mfield({{"2", "x*y"}, {"0", "1"}}, 2), mfield({{"cos(y)", "0"}, {"x", "3"}}, 2));
    const GenConnection D = trivial_connection();
    Rng rng(4);
    const GField s = random_section(rng, 2), t = random_section(rng, 2);
    const Vec X = top(value_at(s, kP));
    Mat dP = Mat::Zero(4, 4);
    for (int i = 0; i < 2; ++i) dP += X[i] * fd_partial([&](const Point& x) { return matrix(P, x); }, kP, i);
    CHECK(inf(Vec(cov_operator(D, P, s, t, kP) - dP * value_at(t, kP))) <= 1e-8);
}
