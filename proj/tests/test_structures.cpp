#include <doctest.h>

#include <cmath>

#include "gengeom/errors.hpp"
#include "gengeom/identities.hpp"
#include "gengeom/structures.hpp"
#include "oracles.hpp"

using namespace gg;
using namespace oracle;

namespace {

EndoField endo(const Mat& m) { return EndoField{constant_matrix(m)}; }
BilinearField metric(const Mat& m) { return BilinearField{constant_matrix(m)}; }

const Point kP{0.2, 0.3};
const Point kP4{0.2, 0.3, -0.1, 0.5};

Mat I(int n) { return Mat::Identity(n, n); }
Mat Z(int n) { return Mat::Zero(n, n); }

// Dense closed forms with h symmetric, so h as a map T -> T* is h and J* is J^T.
Mat minus_oracle(const Mat& h, const Mat& J) {
    const auto n = static_cast<int>(J.rows());
    return blocks(J, -(J * J + I(n)) * h.inverse(), h, -J.transpose());
}
Mat plus_oracle(const Mat& h, const Mat& J) {
    const auto n = static_cast<int>(J.rows());
    return blocks(J, -(J * J - I(n)) * h.inverse(), h, -J.transpose());
}

Mat diag4(double a, double b, double c, double d) { return Vec((Vec(4) << a, b, c, d).finished()).asDiagonal(); }

} // namespace

TEST_CASE("pair builder with equal para-Hermitian inputs") {
    const Sampler s(chart(2), 6, 1);
    BuildContext ctx{s};
    const Mat J = mat2(0, 1, 1, 0);
    const Triple t = build_pair_para(metric(I(2)), endo(J), endo(J), ctx);
    const Mat m = matrix(t.J1, kP), p = matrix(t.J2, kP);
    CHECK(inf(Mat(m - minus_oracle(I(2), J))) <= 1e-14);
    CHECK(inf(Mat(p - plus_oracle(I(2), J))) <= 1e-14);
    CHECK(inf(Mat(m * m + I(4))) <= 1e-14);
    CHECK(inf(Mat(p * p - I(4))) <= 1e-14);
    CHECK(inf(Mat(m * p + p * m)) <= 1e-14);
    CHECK(inf(Mat(matrix(t.J3, kP) - m * p)) <= 1e-14);
    CHECK(classify_triple(t.J1, t.J2, t.J3, s).kind == TripleKind::ParaQuaternionic);
}

TEST_CASE("pair builder rejects inputs whose difference is not nilpotent") {
    const Sampler s(chart(2), 4, 1);
    BuildContext ctx{s};
    CHECK_THROWS_AS(build_pair_para(metric(I(2)), endo(I(2)), endo(Z(2)), ctx), PreconditionFailed);
    BuildContext forced{s, {}, true};
    CHECK_NOTHROW(build_pair_para(metric(I(2)), endo(I(2)), endo(Z(2)), forced));
    CHECK_FALSE(forced.warnings.empty());
    // not h-symmetric
    BuildContext ctx2{s};
    CHECK_THROWS_AS(build_single(metric(I(2)), endo(mat2(0, -1, 1, 0)), ctx2), PreconditionFailed);
}

TEST_CASE("single builder") {
    const Sampler s(chart(2), 6, 2);
    SUBCASE("J = 0 gives the product diag(-I, I)") {
        BuildContext ctx{s};
        const Mat h = mat2(2, 0.3, 0.3, 1);
        const Triple t = build_single(metric(h), endo(Z(2)), ctx);
        CHECK(inf(Mat(matrix(t.J3, kP) - blocks(-I(2), Z(2), Z(2), I(2)))) <= 1e-14);
        CHECK(inf(Mat(matrix(t.J1, kP) - blocks(Z(2), -h.inverse(), h, Z(2)))) <= 1e-14);
        CHECK(classify_operator(t.J1, s).kind == OpKind::AlmostComplex);
        CHECK(classify_operator(t.J3, s).kind == OpKind::AlmostProduct);
        CHECK(classify_triple(t.J1, t.J2, t.J3, s).kind == TripleKind::ParaQuaternionic);
    }
    SUBCASE("product blocks in closed form for a point-dependent instance") {
        BuildContext ctx{s};
        const BilinearField h{mfield({{"2 + x", "y"}, {"y", "1"}}, 2)};
        // J = h^-1 A with A symmetric is h-symmetric
        const MatrixField A = mfield({{"sin(x)", "1"}, {"1", "y^2"}}, 2);
        const MatrixField Jm = [h, A](const JetPoint& p) { return inverse(h.m(p), p) * A(p); };
        const Triple t = build_single(h, EndoField{Jm}, ctx);
        const Mat hx = value_at(h.m, kP), J = value_at(Jm, kP);
        CHECK(inf(Mat(matrix(t.J3, kP) - blocks(-I(2), 2 * J * hx.inverse(), Z(2), I(2)))) <= 1e-13);
        CHECK(inf(Mat(matrix(single_product_blocks(h, EndoField{Jm}, 2), kP) - matrix(t.J3, kP))) <= 1e-13);
        CHECK(classify_triple(t.J1, t.J2, t.J3, s).kind == TripleKind::ParaQuaternionic);
    }
    SUBCASE("Norden input kills the upper right block of the complex member") {
        BuildContext ctx{s};
        const Triple t = build_single(metric(mat2(1, 0, 0, -1)), endo(mat2(0, 1, -1, 0)), ctx);
        CHECK(inf(Mat(matrix(t.J1, kP).topRightCorner(2, 2))) == 0.0);
        CHECK(inf(Mat(matrix(t.J2, kP).topRightCorner(2, 2))) > 1.0);
    }
    SUBCASE("para-Norden input kills the upper right block of the product member") {
        BuildContext ctx{s};
        const Triple t = build_single(metric(I(2)), endo(mat2(0, 1, 1, 0)), ctx);
        CHECK(inf(Mat(matrix(t.J2, kP).topRightCorner(2, 2))) == 0.0);
        CHECK(inf(Mat(matrix(t.J1, kP).topRightCorner(2, 2))) > 1.0);
    }
}

TEST_CASE("general builder with free upper right blocks") {
    const Sampler s(chart(2), 6, 3);
    const Mat h = mat2(1, 0, 0, -1), J = mat2(0, 1, -1, 0);
    SUBCASE("multiples of h^-1 reproduce the lambda builder") {
        BuildContext ctx{s};
        const GeneralHResult g = build_general_H(metric(h), endo(J), endo(J), CoVecMapField{constant_matrix(0.5 * h.inverse())},
                                                 CoVecMapField{constant_matrix(-2.0 * h.inverse())}, ctx);
        BuildContext ctx2{s};
        const LambdaResult l = build_lambda(metric(h), endo(J), endo(J), 0.5, -2.0, ctx2);
        CHECK(inf(Mat(matrix(g.J1, kP) - matrix(l.J1, kP))) <= 1e-14);
        CHECK(inf(Mat(matrix(g.J2, kP) - matrix(l.J2, kP))) <= 1e-14);
    }
    SUBCASE("zero blocks reproduce the factors of the product builder") {
        BuildContext ctx{s};
        const Mat J2 = mat2(0, -1, 1, 0) * -1.0;
        const GeneralHResult g = build_general_H(metric(h), endo(J), endo(J2), CoVecMapField{constant_matrix(Z(2))},
                                                 CoVecMapField{constant_matrix(Z(2))}, ctx);
        const auto f = on_factors(metric(h), endo(J), endo(J2), 2);
        CHECK(inf(Mat(matrix(g.J1, kP) - matrix(f[0], kP))) <= 1e-14);
        CHECK(inf(Mat(matrix(g.J2, kP) - matrix(f[1], kP))) <= 1e-14);
    }
    SUBCASE("the matrix system decides anticommutation") {
        BuildContext ctx{s};
        const BilinearField hh = metric(h);
        const GeneralHResult g = build_general_H(hh, endo(J), endo(J), CoVecMapField{constant_matrix(mat2(1, 2, 3, 4))},
                                                 CoVecMapField{mfield({{"x", "0"}, {"1", "y"}}, 2)}, ctx);
        CHECK_FALSE(g.system.ok);
        CHECK_FALSE(g.anticommute.ok);
        const Mat a = matrix(g.J1, kP), b = matrix(g.J2, kP);
        CHECK(inf(Mat(a * b + b * a)) > 1e-3);
    }
}

TEST_CASE("lambda builder") {
    const Sampler s2(chart(2), 6, 4);
    const Mat h = mat2(1, 0, 0, -1), J = mat2(0, 1, -1, 0);
    SUBCASE("equal Norden inputs: complex members that do not anticommute") {
        BuildContext ctx{s2};
        const LambdaResult l = build_lambda(metric(h), endo(J), endo(J), 0, 0, ctx);
        CHECK(l.classes[0].kind == OpKind::AlmostComplex);
        CHECK(l.classes[1].kind == OpKind::AlmostComplex);
        CHECK(l.complex_by_remark[0]);
        CHECK_FALSE(l.anticommute_by_remark);
        CHECK(inf(Mat(J * J + J * J + 2 * I(2))) == 0.0);
        const Mat a = matrix(l.J1, kP), b = matrix(l.J2, kP);
        CHECK(inf(Mat(a * b + b * a)) > 1.0);
        CHECK(l.product_matches.ok);
    }
    SUBCASE("lambda = 2 turns a complex input into a product member") {
        BuildContext ctx{s2};
        const LambdaResult l = build_lambda(metric(h), endo(J), endo(J), 2, 2, ctx);
        CHECK(l.classes[0].kind == OpKind::AlmostProduct);
        CHECK(l.product_by_remark[0]);
        const Mat a = matrix(l.J1, kP);
        CHECK(inf(Mat(a * a - I(4))) <= 1e-14);
        CHECK(l.square_formula[0].ok);
    }
    SUBCASE("quaternion inputs give a quaternionic triple") {
        const Sampler s4(chart(4), 6, 4);
        BuildContext ctx{s4};
        const Mat h4 = diag4(1, -1, -1, 1);
        const LambdaResult l = build_lambda(metric(h4), endo(quat_i()), endo(quat_j()), 0, 0, ctx);
        CHECK(l.anticommute_by_remark);
        CHECK(l.product_matches.ok);
        CHECK(classify_triple(l.J1, l.J2, l.product, s4).kind == TripleKind::Quaternionic);
    }
    SUBCASE("rescaled complex input with lambda = 1/2") {
        const Sampler s4(chart(4), 6, 4);
        BuildContext ctx{s4};
        const Mat Is = std::sqrt(1.5) * quat_i();
        const LambdaResult l = build_lambda(metric(diag4(1, -1, -1, 1)), endo(Is), endo(Is), 0.5, 0.5, ctx);
        CHECK(l.classes[0].kind == OpKind::AlmostComplex);
        CHECK(l.complex_by_remark[0]);
        const Mat a = matrix(l.J1, kP4);
        CHECK(inf(Mat(a * a + I(8))) <= 1e-13);
    }
}

TEST_CASE("diagonal pairs") {
    SUBCASE("quaternion inputs") {
        const Sampler s(chart(4), 4, 5);
        const DiagPair d = build_diag_pair(endo(quat_i()), endo(quat_j()), 4);
        CHECK(inf(Mat(matrix(d.J1, kP4) - blocks(quat_i(), Z(4), Z(4), -quat_i().transpose()))) == 0.0);
        CHECK(inf(Mat(matrix(d.product, kP4) - matrix(d.J1, kP4) * matrix(d.J2, kP4))) <= 1e-14);
        CHECK(classify_triple(d.J1, d.J2, d.product, s).kind == TripleKind::Quaternionic);
    }
    SUBCASE("anticommuting products, complex product first") {
        const Sampler s(chart(2), 4, 5);
        const DiagPair d = build_diag_pair(endo(mat2(0, 1, 1, 0)), endo(mat2(1, 0, 0, -1)), 2);
        const TripleClass tc = classify_triple(d.product, d.J1, d.J2, s);
        CHECK(tc.kind == TripleKind::ParaQuaternionic);
        CHECK(tc.squares[0] == OpKind::AlmostComplex);
        // (J1 J2) J1 = -J2 here
        CHECK(tc.product_sign == -1);
    }
    SUBCASE("commuting products") {
        const Sampler s(chart(2), 4, 5);
        const DiagPair d = build_diag_pair(endo(I(2)), endo(I(2)), 2);
        CHECK(classify_triple(d.J1, d.J2, d.product, s).kind == TripleKind::Hyperproduct);
    }
    SUBCASE("commuting complex structures") {
        const Sampler s(chart(2), 4, 5);
        const Mat R = mat2(0, -1, 1, 0);
        const DiagPair d = build_diag_pair(endo(R), endo(R), 2);
        const TripleClass tc = classify_triple(d.J1, d.J2, d.product, s);
        CHECK(tc.kind == TripleKind::ComplexProduct);
        CHECK(tc.commuting);
    }
}

TEST_CASE("product of the two lower-triangular factors") {
    const Sampler s(chart(2), 4, 6);
    const Mat h = mat2(1, 0, 0, -1), J = mat2(0, 1, -1, 0);
    BuildContext ctx{s};
    const GenOperator O = build_on(metric(h), endo(J), endo(J), ctx);
    const Mat o = matrix(O, kP);
    CHECK(inf(Mat(o.bottomLeftCorner(2, 2))) == 0.0);
    const Mat J4 = J * J * J * J;
    CHECK(inf(Mat(o * o - blocks(J4, Z(2), Z(2), J4.transpose()))) <= 1e-14);
    CHECK(classify_operator(O, s).kind == OpKind::AlmostProduct);
    const auto f = on_factors(metric(h), endo(J), endo(J), 2);
    CHECK(inf(Mat(matrix(f[0], kP) * matrix(f[1], kP) - o)) <= 1e-14);

    BuildContext ctx2{s};
    const Mat A = mat2(0, 1, 1, 0), B = mat2(1, 1, 1, 0);
    CHECK(inf(Mat(A * B - B * A)) > 0.5);
    CHECK(inf(Mat(A * B + B * A)) > 0.5);
    const Mat n = matrix(build_on(metric(I(2)), endo(A), endo(B), ctx2), kP);
    CHECK(inf(Mat(n.bottomLeftCorner(2, 2))) > 0.5);
    CHECK(inf(Mat((n * n).bottomLeftCorner(2, 2))) > 0.5);
}

TEST_CASE("families") {
    const Sampler s(chart(2), 4, 7);
    BuildContext ctx{s};
    const Triple para = build_single(metric(mat2(2, 0.3, 0.3, 1)), endo(Z(2)), ctx);
    const Sampler s4(chart(4), 4, 7);
    const DiagPair q = build_diag_pair(endo(quat_i()), endo(quat_j()), 4);
    const Triple quat{q.J1, q.J2, q.product};

    const FamilyMember c = family_build(Family::J_ab_para, para, std::cosh(0.5), std::sinh(0.5), s);
    CHECK(c.expected == OpKind::AlmostComplex);
    CHECK(c.actual.kind == OpKind::AlmostComplex);
    CHECK(c.square.ok);

    const FamilyMember id = family_build(Family::J_ab_para, para, 1.0, 0.0, s);
    CHECK(inf(Mat(matrix(id.op, kP) - matrix(para.J1, kP))) == 0.0);

    const FamilyMember qc = family_build(Family::J_ab_quat, quat, std::cos(0.3), std::sin(0.3), s4);
    CHECK(qc.actual.kind == OpKind::AlmostComplex);
    const Mat a = matrix(quat.J1, kP4), b = matrix(quat.J2, kP4);
    const Mat m = std::cos(0.3) * a + std::sin(0.3) * a * b;
    CHECK(inf(Mat(matrix(qc.op, kP4) - m)) <= 1e-14);
    CHECK(inf(Mat(m * m + I(8))) <= 1e-14);

    // K_ab_para uses the product member: a^2 + b^2 = 1 makes it a product structure
    const FamilyMember k = family_build(Family::K_ab_para, para, 0.6, 0.8, s);
    CHECK(k.actual.kind == OpKind::AlmostProduct);
    CHECK(k.expected_square == doctest::Approx(1.0));

    CHECK(family_admissible(Family::J_ab_quat, 0.6, 0.8) == OpKind::AlmostComplex);
    CHECK(family_admissible(Family::J_ab_para, std::sinh(0.3), std::cosh(0.3)) == OpKind::AlmostProduct);
    CHECK_THROWS_AS(family_admissible(Family::J_ab_quat, 2.0, 0.0), AdmissibilityFailed);
    CHECK_THROWS_AS(family_build(Family::J_ab_quat, para, 1.0, 0.0, s), KindMismatch);
    CHECK_THROWS_AS(family_build(Family::K_ab_parapair, para, 1.0, 0.0, s), KindMismatch);
    CHECK(family_from_string("K_ab_parapair") == Family::K_ab_parapair);
    CHECK(&family_partner(Family::J_ab_para, para) == &para.J2);
    CHECK(&family_partner(Family::K_ab_para, para) == &para.J1);
}

TEST_CASE("identities of the single-J structures") {
    const Sampler s(chart(2), 6, 8);
    const Tolerance tol{1e-7, 0};
    SUBCASE("covariant derivative formulas and the Nijenhuis criterion hold for any data") {
        const BilinearField h = curved_metric();
        const MatrixField A = mfield({{"sin(x)", "1"}, {"1", "y^2"}}, 2);
        const MatrixField Jm = [h, A](const JetPoint& p) { return inverse(h.m(p), p) * A(p); };
        for (const Verdict& v : single_cov_formulas(h, EndoField{Jm}, twisted(), s, tol)) CHECK(v.ok);
        CHECK(single_nijenhuis_criterion(h, EndoField{Jm}, twisted(), s, tol).ok);
    }
    SUBCASE("closed forms of N with a parallel J") {
        const BilinearField h{mfield({{"exp(x)", "0"}, {"0", "2 + sin(y)"}}, 2)};
        const Connection lc = levi_civita(h, 2);
        const EndoField J = endo(mat2(1, 0, 0, -1));
        CHECK(is_parallel(lc, J, s));
        for (double e : {1.0, -1.0})
            for (const Verdict& v : pair_nijenhuis_closed_forms(h, J, e, lc, s, tol)) CHECK(v.ok);
    }
}

TEST_CASE("Nijenhuis propagation through a triple") {
    const Tolerance tol{1e-7, 0};
    SUBCASE("quaternionic, curved connection") {
        const Sampler s(chart(4), 4, 9);
        const DiagPair q = build_diag_pair(EndoField{mfield({{"0", "-1", "0", "0"}, {"1", "0", "0", "0"}, {"0", "0", "0", "-1"}, {"0", "0", "1", "0"}}, 4)},
                                           endo(quat_j()), 4);
        std::vector<std::vector<std::vector<ExprPtr>>> tab(4, std::vector<std::vector<ExprPtr>>(4, std::vector<ExprPtr>(4, parse("0", {}))));
        tab[0][0][1] = parse("x", vars4());
        tab[2][1][3] = parse("y*z", vars4());
        tab[3][3][3] = parse("sin(x)", vars4());
        const Connection c = christoffel_connection(4, tab);
        CHECK_FALSE(is_integrable(q.J1, c, s));
        CHECK(propagation_quaternionic(Triple{q.J1, q.J2, q.product}, c, s, tol).ok);
    }
    SUBCASE("para-quaternionic with the complex member first") {
        const Sampler s(chart(2), 4, 9);
        const DiagPair d = build_diag_pair(endo(mat2(0, 1, 1, 0)), endo(mat2(1, 0, 0, -1)), 2);
        const Triple t{d.product, d.J1, d.J2};
        CHECK_FALSE(is_integrable(d.J1, twisted(), s));
        for (const Verdict& v : propagation_para(t, twisted(), s, tol)) CHECK(v.ok);
    }
}
