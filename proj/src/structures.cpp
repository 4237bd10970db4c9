#include "gengeom/structures.hpp"

#include <cmath>

#include "gengeom/errors.hpp"

namespace gg {

void BuildContext::require(const Verdict& v, const std::string& what) {
    if (v.ok) return;
    std::string msg = what + " fails (max residual " + std::to_string(v.max_residual) + ")";
    if (v.witness) msg += " at sample " + std::to_string(v.witness->point_index);
    if (!force) throw PreconditionFailed(msg);
    warnings.push_back(msg);
}

std::string to_string(OpKind k) {
    switch (k) {
    case OpKind::AlmostComplex: return "almost_complex";
    case OpKind::AlmostProduct: return "almost_product";
    case OpKind::Neither: return "neither";
    }
    return "neither";
}

std::string to_string(TripleKind k) {
    switch (k) {
    case TripleKind::Quaternionic: return "quaternionic";
    case TripleKind::ParaQuaternionic: return "para_quaternionic";
    case TripleKind::ComplexProduct: return "complex_product";
    case TripleKind::Hyperproduct: return "hyperproduct";
    case TripleKind::None: return "none";
    }
    return "none";
}

namespace {

int njet(const JetPoint& p) { return static_cast<int>(p.size()); }

JMat zeros(int n, const JetPoint& p) { return JMat(n, n, njet(p)); }

Verdict matrix_identity(const Sampler& s, const Tolerance& tol, const std::string& what,
                        const std::function<std::pair<Mat, double>(const Point&)>& residual) {
    Verdict v;
    const auto& pts = s.points();
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const auto [r, scale] = residual(pts[k]);
        v.record(r.cwiseAbs().maxCoeff(), scale, tol, static_cast<int>(k), pts[k], what);
    }
    return v;
}

double mag(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

} // namespace

OpClass classify_operator(const GenOperator& J, const Sampler& s, const Tolerance& tol) {
    OpClass c;
    const int m = 2 * J.n;
    c.complex = matrix_identity(s, tol, "J^2 + I", [&](const Point& x) {
        const Mat M = matrix(J, x);
        const Mat M2 = M * M;
        return std::pair{Mat(M2 + Mat::Identity(m, m)), mag(M2)};
    });
    c.product = matrix_identity(s, tol, "J^2 - I", [&](const Point& x) {
        const Mat M = matrix(J, x);
        const Mat M2 = M * M;
        return std::pair{Mat(M2 - Mat::Identity(m, m)), mag(M2)};
    });
    if (c.complex.ok) c.kind = OpKind::AlmostComplex;
    else if (c.product.ok) c.kind = OpKind::AlmostProduct;
    return c;
}

Verdict operator_relation(const GenOperator& A, const GenOperator& B, double sign, const Sampler& s,
                          const Tolerance& tol) {
    return matrix_identity(s, tol, sign < 0 ? "AB + BA" : "AB - BA", [&](const Point& x) {
        const Mat a = matrix(A, x), b = matrix(B, x);
        const Mat ab = a * b;
        return std::pair{Mat(ab - sign * (b * a)), mag(ab)};
    });
}

TripleClass classify_triple(const GenOperator& J1, const GenOperator& J2, const GenOperator& J3, const Sampler& s,
                            const Tolerance& tol) {
    TripleClass t;
    t.squares = {classify_operator(J1, s, tol).kind, classify_operator(J2, s, tol).kind,
                 classify_operator(J3, s, tol).kind};
    for (int sign : {1, -1}) {
        Verdict v = matrix_identity(s, tol, sign > 0 ? "J3 - J1 J2" : "J3 + J1 J2", [&](const Point& x) {
            const Mat p = matrix(J1, x) * matrix(J2, x);
            return std::pair{Mat(matrix(J3, x) - sign * p), mag(p)};
        });
        if (v.ok) {
            t.product_sign = sign;
            t.product = v;
            break;
        }
        if (sign == 1) t.product = v;
    }
    const Verdict anti = operator_relation(J1, J2, -1.0, s, tol);
    const Verdict comm = operator_relation(J1, J2, 1.0, s, tol);
    t.anticommuting = anti.ok;
    t.commuting = comm.ok;
    t.relation = anti.ok ? anti : comm;
    if (t.product_sign == 0) {
        t.note = "J3 differs from +/- J1 J2";
        return t;
    }
    for (OpKind k : t.squares)
        if (k == OpKind::Neither) {
            t.note = "a member squares to neither -I nor I";
            return t;
        }
    int complex = 0;
    for (OpKind k : t.squares) complex += k == OpKind::AlmostComplex;
    if (t.anticommuting) {
        t.remark = operator_relation(J1, J3, -1.0, s, tol);
        t.remark.merge(operator_relation(J2, J3, -1.0, s, tol));
        if (complex == 3) t.kind = TripleKind::Quaternionic;
        else if (complex == 1) t.kind = TripleKind::ParaQuaternionic;
        if (t.kind == TripleKind::ParaQuaternionic && t.squares[0] != OpKind::AlmostComplex)
            t.note = "complex member is not listed first";
    } else if (t.commuting) {
        if (complex == 0) t.kind = TripleKind::Hyperproduct;
        else if (complex == 2) t.kind = TripleKind::ComplexProduct;
    } else {
        t.note = "J1 and J2 neither commute nor anticommute";
    }
    if (t.product_sign < 0 && t.kind != TripleKind::None) t.note += (t.note.empty() ? "" : "; ") + std::string("J3 = -J1 J2");
    return t;
}

Verdict h_symmetric_check(const EndoField& J, const BilinearField& h, const Sampler& s, const Tolerance& tol) {
    return h_symmetry(J, h, s, tol);
}

Verdict commute_check(const EndoField& A, const EndoField& B, const Sampler& s, const Tolerance& tol) {
    return matrix_identity(s, tol, "J1 J2 - J2 J1", [&](const Point& x) {
        const Mat a = value_at(A.m, x), b = value_at(B.m, x);
        return std::pair{Mat(a * b - b * a), mag(a * b)};
    });
}

Verdict anticommute_check(const EndoField& A, const EndoField& B, const Sampler& s, const Tolerance& tol) {
    return matrix_identity(s, tol, "J1 J2 + J2 J1", [&](const Point& x) {
        const Mat a = value_at(A.m, x), b = value_at(B.m, x);
        return std::pair{Mat(a * b + b * a), mag(a * b)};
    });
}

namespace {

// (J, c (J^2 + e I) h^-1; h, -J*)
GenOperator shifted_operator(const BilinearField& h, const EndoField& J, double e, const std::string& name) {
    auto f = [hm = h.m, Jm = J.m, e](const JetPoint& p) {
        const JMat Jv = Jm(p);
        const JMat hv = hm(p);
        const int n = Jv.rows;
        const JMat S = sharp_matrix(hv, p);
        return GenBlocks{Jv, -1.0 * ((Jv * Jv + e * jidentity(n, njet(p))) * S), flat_matrix(hv), -transpose(Jv)};
    };
    return GenOperator{0, f, name};
}

int dim_of(const BuildContext& ctx) { return ctx.sampler.chart().dim; }

} // namespace

Triple build_pair_para(const BilinearField& h, const EndoField& J1, const EndoField& J2, BuildContext& ctx) {
    const Sampler& s = ctx.sampler;
    ctx.require(h_symmetric_check(J1, h, s, ctx.tol), "h-symmetry of J1");
    ctx.require(h_symmetric_check(J2, h, s, ctx.tol), "h-symmetry of J2");
    ctx.require(commute_check(J1, J2, s, ctx.tol), "J1 J2 = J2 J1");
    ctx.require(matrix_identity(s, ctx.tol, "(J1 - J2)^2",
                                [&](const Point& x) {
                                    const Mat d = value_at(J1.m, x) - value_at(J2.m, x);
                                    return std::pair{Mat(d * d), 0.0};
                                }),
                "(J1 - J2)^2 = 0");
    require_nondegenerate(h, s);
    GenOperator jm = shifted_operator(h, J1, 1.0, "J-");
    GenOperator jp = shifted_operator(h, J2, -1.0, "J+");
    jm.n = jp.n = dim_of(ctx);
    GenOperator prod = compose(jm, jp);
    prod.name = "J";
    return Triple{jm, jp, prod};
}

Triple build_single(const BilinearField& h, const EndoField& J, BuildContext& ctx) {
    return build_pair_para(h, J, J, ctx);
}

GenOperator single_product_blocks(const BilinearField& h, const EndoField& J, int n) {
    auto f = [hm = h.m, Jm = J.m](const JetPoint& p) {
        const JMat Jv = Jm(p);
        const int k = Jv.rows;
        const JMat S = sharp_matrix(hm(p), p);
        return GenBlocks{-jidentity(k, njet(p)), 2.0 * (Jv * S), zeros(k, p), jidentity(k, njet(p))};
    };
    return GenOperator{n, f, "J"};
}

GeneralHResult build_general_H(const BilinearField& h, const EndoField& J1, const EndoField& J2,
                               const CoVecMapField& H1, const CoVecMapField& H2, BuildContext& ctx) {
    const Sampler& s = ctx.sampler;
    ctx.require(h_symmetric_check(J1, h, s, ctx.tol), "h-symmetry of J1");
    ctx.require(h_symmetric_check(J2, h, s, ctx.tol), "h-symmetry of J2");
    const int n = dim_of(ctx);
    auto make = [&](const EndoField& J, const CoVecMapField& H, const std::string& name) {
        auto f = [hm = h.m, Jm = J.m, Hm = H.m](const JetPoint& p) {
            const JMat Jv = Jm(p);
            return GenBlocks{Jv, Hm(p), flat_matrix(hm(p)), -transpose(Jv)};
        };
        return GenOperator{n, f, name};
    };
    GeneralHResult r{make(J1, H1, "J1"), make(J2, H2, "J2"), {}, {}};
    r.system = matrix_identity(s, ctx.tol, "anticommutation system", [&](const Point& x) {
        const Mat a = value_at(J1.m, x), b = value_at(J2.m, x);
        const Mat F = value_at(h.m, x).transpose();
        const Mat p = value_at(H1.m, x), q = value_at(H2.m, x);
        const Mat e1 = a * b + b * a + (p + q) * F;
        const Mat e2 = a.transpose() * b.transpose() + b.transpose() * a.transpose() + F * (p + q);
        const Mat e3 = a * q - q * a.transpose() - p * b.transpose() + b * p;
        Mat all(n, 3 * n);
        all << e1, e2, e3;
        return std::pair{all, mag(a * b) + mag(p * F)};
    });
    r.anticommute = operator_relation(r.J1, r.J2, -1.0, s, ctx.tol);
    return r;
}

LambdaResult build_lambda(const BilinearField& h, const EndoField& J1, const EndoField& J2, double l1, double l2,
                          BuildContext& ctx) {
    const Sampler& s = ctx.sampler;
    const int n = dim_of(ctx);
    auto scaled_inverse = [&](double l) {
        return CoVecMapField{[hm = h.m, l](const JetPoint& p) { return l * sharp_matrix(hm(p), p); }};
    };
    GeneralHResult g = build_general_H(h, J1, J2, scaled_inverse(l1), scaled_inverse(l2), ctx);
    LambdaResult r;
    r.J1 = g.J1;
    r.J2 = g.J2;
    auto f = [hm = h.m, a = J1.m, b = J2.m, l1, l2, n](const JetPoint& p) {
        const JMat A = a(p), B = b(p), hv = hm(p);
        const JMat S = sharp_matrix(hv, p), F = flat_matrix(hv);
        const JMat I = jidentity(n, njet(p));
        const JMat At = transpose(A), Bt = transpose(B);
        return GenBlocks{A * B + l1 * I, (l2 * A - l1 * B) * S, F * B - At * F, At * Bt + l2 * I};
    };
    r.product = GenOperator{n, f, "J"};
    const GenOperator composed = compose(r.J1, r.J2);
    r.product_matches = matrix_identity(s, ctx.tol, "closed-form product", [&](const Point& x) {
        const Mat c = matrix(composed, x);
        return std::pair{Mat(matrix(r.product, x) - c), mag(c)};
    });
    const std::array<const EndoField*, 2> Js{&J1, &J2};
    const std::array<double, 2> ls{l1, l2};
    const std::array<const GenOperator*, 2> ops{&r.J1, &r.J2};
    for (int i = 0; i < 2; ++i) {
        r.square_formula[i] = matrix_identity(s, ctx.tol, "square formula", [&](const Point& x) {
            const Mat M = matrix(*ops[i], x);
            const Mat J = value_at(Js[i]->m, x);
            Mat expect = Mat::Zero(2 * n, 2 * n);
            expect.topLeftCorner(n, n) = J * J;
            expect.bottomRightCorner(n, n) = J.transpose() * J.transpose();
            expect += ls[i] * Mat::Identity(2 * n, 2 * n);
            return std::pair{Mat(M * M - expect), mag(expect)};
        });
        r.complex_by_remark[i] = matrix_identity(s, ctx.tol, "J^2 + (l+1) I", [&](const Point& x) {
                                     const Mat J = value_at(Js[i]->m, x);
                                     return std::pair{Mat(J * J + (ls[i] + 1.0) * Mat::Identity(n, n)), mag(J * J)};
                                 }).ok;
        r.product_by_remark[i] = matrix_identity(s, ctx.tol, "J^2 + (l-1) I", [&](const Point& x) {
                                     const Mat J = value_at(Js[i]->m, x);
                                     return std::pair{Mat(J * J + (ls[i] - 1.0) * Mat::Identity(n, n)), mag(J * J)};
                                 }).ok;
        r.classes[i] = classify_operator(*ops[i], s, ctx.tol);
    }
    r.anticommute_by_remark = matrix_identity(s, ctx.tol, "J1 J2 + J2 J1 + (l1+l2) I", [&](const Point& x) {
                                  const Mat a = value_at(J1.m, x), b = value_at(J2.m, x);
                                  return std::pair{Mat(a * b + b * a + (l1 + l2) * Mat::Identity(n, n)),
                                                   mag(a * b)};
                              }).ok;
    return r;
}

DiagPair build_diag_pair(const EndoField& J1, const EndoField& J2, int n) {
    auto diag = [n](MatrixField Jm, std::string name) {
        auto f = [Jm = std::move(Jm)](const JetPoint& p) {
            const JMat J = Jm(p);
            return GenBlocks{J, zeros(J.rows, p), zeros(J.rows, p), -transpose(J)};
        };
        return GenOperator{n, f, std::move(name)};
    };
    DiagPair d{diag(J1.m, "J1"), diag(J2.m, "J2"), {}};
    auto f = [a = J1.m, b = J2.m](const JetPoint& p) {
        const JMat A = a(p), B = b(p);
        return GenBlocks{A * B, zeros(A.rows, p), zeros(A.rows, p), transpose(A) * transpose(B)};
    };
    d.product = GenOperator{n, f, "J"};
    return d;
}

GenOperator build_on(const BilinearField& h, const EndoField& J1, const EndoField& J2, BuildContext& ctx) {
    ctx.require(h_symmetric_check(J1, h, ctx.sampler, ctx.tol), "h-symmetry of J1");
    ctx.require(h_symmetric_check(J2, h, ctx.sampler, ctx.tol), "h-symmetry of J2");
    auto f = [hm = h.m, a = J1.m, b = J2.m](const JetPoint& p) {
        const JMat A = a(p), B = b(p);
        return GenBlocks{A * B, zeros(A.rows, p), flat_matrix(hm(p)) * (B - A), transpose(A) * transpose(B)};
    };
    return GenOperator{dim_of(ctx), f, "J"};
}

std::array<GenOperator, 2> on_factors(const BilinearField& h, const EndoField& J1, const EndoField& J2, int n) {
    auto make = [&](const EndoField& J, const std::string& name) {
        auto f = [hm = h.m, Jm = J.m](const JetPoint& p) {
            const JMat Jv = Jm(p);
            return GenBlocks{Jv, zeros(Jv.rows, p), flat_matrix(hm(p)), -transpose(Jv)};
        };
        return GenOperator{n, f, name};
    };
    return {make(J1, "J1"), make(J2, "J2")};
}

std::string to_string(Family f) {
    switch (f) {
    case Family::J_ab_para: return "J_ab_para";
    case Family::K_ab_para: return "K_ab_para";
    case Family::J_ab_quat: return "J_ab_quat";
    case Family::K_ab_parapair: return "K_ab_parapair";
    }
    return "";
}

Family family_from_string(const std::string& s) {
    for (Family f : {Family::J_ab_para, Family::K_ab_para, Family::J_ab_quat, Family::K_ab_parapair})
        if (to_string(f) == s) return f;
    throw UnknownReference("unknown family '" + s + "'");
}

namespace {

// op^2 = square_sign(which) (a^2 + k b^2) I
double family_square(Family which, double a, double b) {
    switch (which) {
    case Family::J_ab_para: return -(a * a - b * b);
    case Family::K_ab_para: return a * a + b * b;
    case Family::J_ab_quat: return -(a * a + b * b);
    case Family::K_ab_parapair: return a * a - b * b;
    }
    return 0.0;
}

} // namespace

OpKind family_admissible(Family which, double a, double b, double tol) {
    const double sq = family_square(which, a, b);
    if (std::abs(sq + 1.0) <= tol) return OpKind::AlmostComplex;
    if (std::abs(sq - 1.0) <= tol) return OpKind::AlmostProduct;
    throw AdmissibilityFailed(to_string(which) + " with (a, b) = (" + std::to_string(a) + ", " + std::to_string(b) +
                              ") satisfies no sign condition");
}

const GenOperator& family_partner(Family which, const Triple& base) {
    switch (which) {
    case Family::J_ab_para: return base.J2;
    case Family::K_ab_para: return base.J1;
    case Family::J_ab_quat: return base.J2;
    case Family::K_ab_parapair: return base.J2;
    }
    return base.J2;
}

FamilyMember family_build(Family which, const Triple& base, double a, double b, const Sampler& s,
                          const Tolerance& tol) {
    const TripleClass tc = classify_triple(base.J1, base.J2, base.J3, s, tol);
    const bool quat = which == Family::J_ab_quat;
    if (quat && tc.kind != TripleKind::Quaternionic)
        throw KindMismatch(to_string(which) + " needs a quaternionic base triple, got " + to_string(tc.kind));
    if (!quat && tc.kind != TripleKind::ParaQuaternionic)
        throw KindMismatch(to_string(which) + " needs a para-quaternionic base triple, got " + to_string(tc.kind));
    if ((which == Family::J_ab_para || which == Family::K_ab_para) && tc.squares[0] != OpKind::AlmostComplex)
        throw KindMismatch(to_string(which) + " needs the complex structure first in the base triple");
    if (which == Family::K_ab_parapair &&
        (tc.squares[0] != OpKind::AlmostProduct || tc.squares[1] != OpKind::AlmostProduct))
        throw KindMismatch("K_ab_parapair needs two product structures first in the base triple");

    const GenOperator prod = compose(base.J1, base.J2);
    const GenOperator& first = which == Family::K_ab_para ? base.J2 : base.J1;
    FamilyMember m;
    m.op = combine(a, first, b, prod);
    m.op.name = to_string(which);
    m.expected_square = family_square(which, a, b);
    const double sq = m.expected_square;
    if (std::abs(sq + 1.0) <= 1e-12) m.expected = OpKind::AlmostComplex;
    else if (std::abs(sq - 1.0) <= 1e-12) m.expected = OpKind::AlmostProduct;
    m.actual = classify_operator(m.op, s, tol);
    const int dim = 2 * base.J1.n;
    m.square = matrix_identity(s, tol, "op^2 - c I", [&](const Point& x) {
        const Mat M = matrix(m.op, x);
        return std::pair{Mat(M * M - sq * Mat::Identity(dim, dim)), mag(M * M)};
    });
    return m;
}

} // namespace gg
