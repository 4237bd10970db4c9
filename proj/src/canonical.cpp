#include "gengeom/canonical.hpp"

#include <algorithm>
#include <cmath>

#include "gengeom/errors.hpp"

namespace gg {

namespace {

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }
double inf_norm(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Vec br(const Connection& c, const GField& a, const GField& b, const Point& x) { return nabla_bracket(c, a, b, x); }

CField apply(const GenOperator& J, const CField& t) { return {gg::apply(J, t.re), gg::apply(J, t.im)}; }

std::vector<GField> frame(int n) {
    std::vector<GField> f;
    for (int i = 0; i < 2 * n; ++i) f.push_back(frame_section(i, n));
    return f;
}

std::vector<std::pair<GField, GField>> random_pairs(std::uint64_t seed, int n, int count) {
    Rng rng(seed);
    std::vector<std::pair<GField, GField>> r;
    for (int k = 0; k < count; ++k) {
        GField a = random_section(rng, n);
        GField b = random_section(rng, n);
        r.emplace_back(std::move(a), std::move(b));
    }
    return r;
}

using PairFn = std::function<Vec(const GField&, const GField&, const Point&)>;

// Frame pairs plus `extra` random pairs.
Verdict pair_check(const Sampler& s, int n, const Tolerance& tol, const PairFn& f, const std::string& what,
                   int extra = 4) {
    Verdict v = frame_check(s, n, tol, f, what);
    const auto rp = random_pairs(s.seed() ^ 0xf00dULL, n, extra);
    const auto& pts = s.points();
    for (std::size_t p = 0; p < pts.size(); ++p)
        for (std::size_t k = 0; k < rp.size(); ++k)
            v.record(inf_norm(f(rp[k].first, rp[k].second, pts[p])), 0.0, tol, static_cast<int>(p), pts[p],
                     what + "(random pair " + std::to_string(k) + ")");
    return v;
}

Verdict cross_check(const Sampler& s, const Tolerance& tol, const std::vector<GField>& left,
                    const std::vector<GField>& right, const PairFn& f, const std::string& what) {
    Verdict v;
    const auto& pts = s.points();
    for (std::size_t p = 0; p < pts.size(); ++p)
        for (std::size_t i = 0; i < left.size(); ++i)
            for (std::size_t j = 0; j < right.size(); ++j)
                v.record(inf_norm(f(left[i], right[j], pts[p])), 0.0, tol, static_cast<int>(p), pts[p],
                         what + "(s" + std::to_string(i) + ", t" + std::to_string(j) + ")");
    return v;
}

Verdict square_check(const GenOperator& J, double sign, const Sampler& s, const Tolerance& tol) {
    Verdict v;
    const auto& pts = s.points();
    const Mat I = Mat::Identity(2 * J.n, 2 * J.n);
    for (std::size_t p = 0; p < pts.size(); ++p) {
        const Mat m = matrix(J, pts[p]);
        v.record(inf_norm(Mat(m * m - sign * I)), inf_norm(m) * inf_norm(m), tol, static_cast<int>(p), pts[p],
                 J.name + "^2");
    }
    return v;
}

void check_anticommute_at(const GenOperator& A, const GenOperator& B, const Point& x) {
    const Mat a = matrix(A, x);
    const Mat b = matrix(B, x);
    const double r = inf_norm(Mat(a * b + b * a));
    if (r > 1e-6 * std::max(1.0, inf_norm(a) * inf_norm(b)))
        throw NotAnticommuting(A.name + " and " + B.name + " do not anticommute, residual " + std::to_string(r));
}

} // namespace

// ---------------------------------------------------------------------------
// Complex sections and projectors

CField complexify(GField s) {
    GField zero = [s](const JetPoint& p) {
        JVec v = s(p);
        for (Jet& j : v) j = Jet(0.0, static_cast<int>(p.size()));
        return v;
    };
    return {std::move(s), std::move(zero)};
}

CVec operator+(const CVec& a, const CVec& b) { return {a.re + b.re, a.im + b.im}; }
CVec operator-(const CVec& a, const CVec& b) { return {a.re - b.re, a.im - b.im}; }
CVec operator*(const Mat& m, const CVec& v) { return {m * v.re, m * v.im}; }

GField project_real(const GenOperator& J, GField s, int sign) {
    GField js = gg::apply(J, s);
    return memoize([s = std::move(s), js = std::move(js), sign](const JetPoint& p) {
        JVec a = s(p);
        const JVec b = js(p);
        for (std::size_t k = 0; k < a.size(); ++k) a[k] = 0.5 * (a[k] + static_cast<double>(sign) * b[k]);
        return a;
    });
}

Vec project_real(const Mat& J, const Vec& s, int sign) { return 0.5 * (s + sign * (J * s)); }

CField project_complex(const GenOperator& J, const CField& t, int sign) {
    const double sg = sign;
    const GField jre = gg::apply(J, t.re);
    const GField jim = gg::apply(J, t.im);
    GField re = scale(0.5, subtract(t.re, scale(sg, jim)));
    GField im = scale(0.5, add(t.im, scale(sg, jre)));
    return {std::move(re), std::move(im)};
}

CVec project_complex(const Mat& J, const CVec& t, int sign) {
    return {0.5 * (t.re - sign * (J * t.im)), 0.5 * (t.im + sign * (J * t.re))};
}

CVec complex_bracket(const Connection& c, const CField& s, const CField& t, const Point& x) {
    const Vec ac = br(c, s.re, t.re, x);
    const Vec bd = br(c, s.im, t.im, x);
    const Vec ad = br(c, s.re, t.im, x);
    const Vec bc = br(c, s.im, t.re, x);
    return {ac - bd, ad + bc};
}

// ---------------------------------------------------------------------------
// Brackets of operators

Vec fn_bracket(const GenOperator& J1, const GenOperator& J2, const Connection& c, const GField& sigma,
               const GField& tau, const Point& x) {
    check_anticommute_at(J1, J2, x);
    const Mat m1 = matrix(J1, x);
    const Mat m2 = matrix(J2, x);
    const GField j1s = gg::apply(J1, sigma), j2s = gg::apply(J2, sigma);
    const GField j1t = gg::apply(J1, tau), j2t = gg::apply(J2, tau);
    return br(c, j1s, j2t, x) + br(c, j2s, j1t, x) - m1 * br(c, j2s, tau, x) - m1 * br(c, sigma, j2t, x) -
           m2 * br(c, j1s, tau, x) - m2 * br(c, sigma, j1t, x);
}

void require_product(const GenOperator& J, const Sampler& s, const Tolerance& tol) {
    const Verdict v = square_check(J, 1.0, s, tol);
    if (!v.ok)
        throw NotProduct(J.name + " is not an almost product structure, residual " + std::to_string(v.max_residual));
}

void require_complex(const GenOperator& J, const Sampler& s, const Tolerance& tol) {
    const Verdict v = square_check(J, -1.0, s, tol);
    if (!v.ok)
        throw NotComplexStructure(J.name + " is not an almost complex structure, residual " +
                                  std::to_string(v.max_residual));
}

void require_anticommuting(const GenOperator& A, const GenOperator& B, const Sampler& s, const Tolerance& tol) {
    const Verdict v = operator_relation(A, B, -1.0, s, tol);
    if (!v.ok)
        throw NotAnticommuting(A.name + " and " + B.name + " do not anticommute, residual " +
                               std::to_string(v.max_residual));
}

// ---------------------------------------------------------------------------
// Canonical connections

GenConnection canonical_para(const GenOperator& J1, const GenOperator& J2, const Connection& c, const Sampler* check,
                             const Tolerance& tol) {
    if (check) {
        require_product(J1, *check, tol);
        require_product(J2, *check, tol);
        require_anticommuting(J1, J2, *check, tol);
    }
    auto f = [J1, J2, c](const GField& sigma, const GField& tau, const Point& x) {
        const Mat m1 = matrix(J1, x);
        const Mat m2 = matrix(J2, x);
        const GField sp = project_real(J1, sigma, 1), sm = project_real(J1, sigma, -1);
        const GField tp = project_real(J1, tau, 1), tm = project_real(J1, tau, -1);
        const Vec a = br(c, sm, tp, x) + m2 * br(c, sp, gg::apply(J2, tp), x);
        const Vec b = br(c, sp, tm, x) + m2 * br(c, sm, gg::apply(J2, tm), x);
        return Vec(project_real(m1, a, 1) + project_real(m1, b, -1));
    };
    return GenConnection{"canonical(" + J1.name + "," + J2.name + ")", f};
}

std::pair<GenOperator, GenOperator> product_members(const GenOperator& A, const GenOperator& B, const Sampler& s,
                                                    const Tolerance& tol) {
    const GenOperator C = compose(A, B);
    std::vector<GenOperator> found;
    for (const GenOperator* op : {&A, &B, &C})
        if (square_check(*op, 1.0, s, tol).ok) found.push_back(*op);
    if (found.size() < 2)
        throw NotProduct("fewer than two almost product structures among " + A.name + ", " + B.name + ", " +
                         C.name);
    return {found[0], found[1]};
}

GenConnection obata(const GenOperator& J1, const GenOperator& J2, const GenOperator& J3, const Connection& c,
                    const Sampler* check, const Tolerance& tol) {
    if (check) {
        const TripleClass tc = classify_triple(J1, J2, J3, *check, tol);
        if (tc.kind != TripleKind::Quaternionic)
            throw NotQuaternionic("triple classifies as " + to_string(tc.kind));
    }
    auto f = [J1, J2, J3, c](const GField& s, const GField& t, const Point& x) {
        const Mat m1 = matrix(J1, x), m2 = matrix(J2, x), m3 = matrix(J3, x);
        const GField s1 = gg::apply(J1, s), s2 = gg::apply(J2, s), s3 = gg::apply(J3, s);
        const GField t1 = gg::apply(J1, t), t2 = gg::apply(J2, t), t3 = gg::apply(J3, t);
        Vec r = m1 * br(c, s2, t3, x) - m1 * br(c, s3, t2, x) + m2 * br(c, s3, t1, x) - m2 * br(c, s1, t3, x) +
                m3 * br(c, s1, t2, x) - m3 * br(c, s2, t1, x);
        r += m1 * br(c, s1, t, x) - 3.0 * (m1 * br(c, s, t1, x));
        r += m2 * br(c, s2, t, x) - 3.0 * (m2 * br(c, s, t2, x));
        r += m3 * br(c, s3, t, x) - 3.0 * (m3 * br(c, s, t3, x));
        r += br(c, s1, t1, x) + br(c, s2, t2, x) + br(c, s3, t3, x) + 3.0 * br(c, s, t, x);
        return Vec(r / 12.0);
    };
    return GenConnection{"obata(" + J1.name + "," + J2.name + "," + J3.name + ")", f};
}

CVec canonical_quat_complex(const GenOperator& J1, const GenOperator& J2, const Connection& c, const CField& sigma,
                            const CField& tau, const Point& x) {
    const CField& s = sigma;
    const CField& t = tau;
    const Mat m1 = matrix(J1, x);
    const Mat m2 = matrix(J2, x);
    const CField sm = project_complex(J1, s, -1), sp = project_complex(J1, s, 1);
    const CField tm = project_complex(J1, t, -1), tp = project_complex(J1, t, 1);
    const CVec a = complex_bracket(c, sm, tp, x) - m2 * complex_bracket(c, sp, apply(J2, tp), x);
    const CVec b = complex_bracket(c, sp, tm, x) - m2 * complex_bracket(c, sm, apply(J2, tm), x);
    return project_complex(m1, a, 1) + project_complex(m1, b, -1);
}

GenConnection canonical_quat(const GenOperator& J1, const GenOperator& J2, const Connection& c, const Sampler* check,
                             const Tolerance& tol) {
    if (check) {
        require_complex(J1, *check, tol);
        require_complex(J2, *check, tol);
        require_anticommuting(J1, J2, *check, tol);
    }
    auto f = [J1, J2, c](const GField& sigma, const GField& tau, const Point& x) {
        const CVec r = canonical_quat_complex(J1, J2, c, complexify(sigma), complexify(tau), x);
        const double im = inf_norm(r.im);
        if (im > 1e-9 * std::max(1.0, inf_norm(r.re)))
            throw ResidualImaginary("imaginary part " + std::to_string(im) + " on real sections");
        return r.re;
    };
    return GenConnection{"canonical(" + J1.name + "," + J2.name + ")", f};
}

double canonical_quat_imaginary(const GenOperator& J1, const GenOperator& J2, const Connection& c, const Sampler& s) {
    double worst = 0.0;
    const auto f = frame(J1.n);
    for (const Point& x : s.points())
        for (const auto& a : f)
            for (const auto& b : f)
                worst = std::max(worst, inf_norm(canonical_quat_complex(J1, J2, c, complexify(a), complexify(b), x).im));
    return worst;
}

GenConnection triple_canonical(const GenOperator& A, const GenOperator& B, const Connection& c, const Sampler& s,
                               const Tolerance& tol) {
    const bool ca = square_check(A, -1.0, s, tol).ok;
    const bool cb = square_check(B, -1.0, s, tol).ok;
    if (ca && cb) return canonical_quat(A, B, c, &s, tol);
    require_anticommuting(A, B, s, tol);
    const auto [p, q] = product_members(A, B, s, tol);
    return canonical_para(p, q, c, &s, tol);
}

Verdict connection_difference(const GenConnection& a, const GenConnection& b, int n, const Sampler& s,
                              const Tolerance& tol) {
    return frame_check(s, n, tol,
                       [&](const GField& x, const GField& y, const Point& p) { return Vec(a(x, y, p) - b(x, y, p)); },
                       a.tag + " - " + b.tag);
}

// ---------------------------------------------------------------------------
// Checks

EquivalenceReport equivalence_suite(const GenOperator& J1, const GenOperator& J2, const Connection& c,
                                    const Sampler& s, const Tolerance& tol) {
    EquivalenceReport r;
    const int n = J1.n;
    const GenConnection D = canonical_para(J1, J2, c, &s, tol);
    r.fn_bracket = pair_check(
        s, n, tol, [&](const GField& a, const GField& b, const Point& x) { return fn_bracket(J1, J2, c, a, b, x); },
        "[J1,J2]");
    r.torsion = pair_check(
        s, n, tol, [&](const GField& a, const GField& b, const Point& x) { return gen_torsion(D, c, a, b, x); }, "T^D");
    r.nijenhuis = integrability_check(J1, c, s, tol);
    r.nijenhuis.merge(integrability_check(J2, c, s, tol));
    r.fn_zero = r.fn_bracket.ok;
    r.torsion_free = r.torsion.ok;
    r.integrable = r.nijenhuis.ok;
    return r;
}

std::vector<GField> eigen_sections(const GenOperator& J, int sign, const Sampler& s, int extra) {
    std::vector<GField> out;
    for (const auto& f : frame(J.n)) out.push_back(project_real(J, f, sign));
    Rng rng(s.seed() ^ 0xe16eULL ^ static_cast<std::uint64_t>(sign + 2));
    for (int k = 0; k < extra; ++k) out.push_back(project_real(J, random_section(rng, J.n), sign));
    return out;
}

Verdict parallel_operator_check(const GenConnection& D, const GenOperator& J, const Sampler& s, const Tolerance& tol) {
    return frame_check(
        s, J.n, tol, [&](const GField& a, const GField& b, const Point& x) { return cov_operator(D, J, a, b, x); },
        "D" + J.name);
}

Verdict mixed_torsion_check(const GenConnection& D, const GenOperator& J1, const Connection& c, const Sampler& s,
                            const Tolerance& tol) {
    return cross_check(
        s, tol, eigen_sections(J1, 1, s), eigen_sections(J1, -1, s),
        [&](const GField& a, const GField& b, const Point& x) { return gen_torsion(D, c, a, b, x); }, "T^D");
}

Verdict mixed_torsion_check_complex(const GenOperator& J1, const GenOperator& J2, const Connection& c,
                                    const Sampler& s, const Tolerance& tol) {
    Verdict v;
    const int n = J1.n;
    std::vector<CField> v1, v2;
    for (const auto& f : frame(n)) {
        v1.push_back(project_complex(J1, complexify(f), -1));
        v2.push_back(project_complex(J1, complexify(f), 1));
    }
    const auto& pts = s.points();
    for (std::size_t p = 0; p < pts.size(); ++p)
        for (std::size_t i = 0; i < v1.size(); ++i)
            for (std::size_t j = 0; j < v2.size(); ++j) {
                const Point& x = pts[p];
                const CVec t = canonical_quat_complex(J1, J2, c, v1[i], v2[j], x) -
                               canonical_quat_complex(J1, J2, c, v2[j], v1[i], x) -
                               complex_bracket(c, v1[i], v2[j], x);
                v.record(std::max(inf_norm(t.re), inf_norm(t.im)), 0.0, tol, static_cast<int>(p), x,
                         "T^D(e" + std::to_string(i) + "^(1,0), e" + std::to_string(j) + "^(0,1))");
            }
    return v;
}

Verdict subspace_check(const GenConnection& D, const GenOperator& J1, const GenOperator& J2, const Sampler& s,
                       const Tolerance& tol) {
    Verdict v;
    const auto f = frame(J1.n);
    struct Part {
        const GenOperator* J;
        int sign;
        const char* name;
    };
    for (const Part part : {Part{&J1, 1, "V1"}, Part{&J1, -1, "V2"}, Part{&J2, 1, "V3"}}) {
        v.merge(cross_check(
            s, tol, f, eigen_sections(*part.J, part.sign, s, 2),
            [&](const GField& a, const GField& b, const Point& x) {
                return project_real(matrix(*part.J, x), D(a, b, x), -part.sign);
            },
            std::string("D into ") + part.name));
    }
    return v;
}

std::array<Verdict, 3> fn_torsion_relations(const GenOperator& J1, const GenOperator& J2, const GenConnection& D,
                                            const Connection& c, const Sampler& s, const Tolerance& tol) {
    const auto v1 = eigen_sections(J1, 1, s);
    const auto v2 = eigen_sections(J1, -1, s);
    auto same = [&](double sign) {
        return [&, sign](const GField& a, const GField& b, const Point& x) {
            return Vec(fn_bracket(J1, J2, c, a, b, x) - 2.0 * sign * (matrix(J2, x) * gen_torsion(D, c, a, b, x)));
        };
    };
    auto mixed = [&](const GField& a, const GField& b, const Point& x) {
        const Mat m1 = matrix(J1, x);
        const Vec rhs = 2.0 * project_real(m1, br(c, a, gg::apply(J2, b), x), -1) -
                        2.0 * project_real(m1, br(c, gg::apply(J2, a), b, x), 1);
        return Vec(fn_bracket(J1, J2, c, a, b, x) - rhs);
    };
    return {cross_check(s, tol, v1, v1, same(1.0), "[J1,J2] - 2 J2 T^D on V1"),
            cross_check(s, tol, v2, v2, same(-1.0), "[J1,J2] + 2 J2 T^D on V2"),
            cross_check(s, tol, v1, v2, mixed, "[J1,J2] on V1 x V2")};
}

Verdict obata_torsion_identity(const Triple& t, const GenConnection& D, const Connection& c, const Sampler& s,
                               const Tolerance& tol, int pairs) {
    const int n = t.J1.n;
    Verdict v;
    const auto rp = random_pairs(s.seed() ^ 0x0b47aULL, n, pairs);
    const auto& pts = s.points();
    for (std::size_t p = 0; p < pts.size(); ++p)
        for (std::size_t k = 0; k < rp.size(); ++k) {
            const auto& [a, b] = rp[k];
            const Point& x = pts[p];
            const Vec N = gen_nijenhuis(t.J1, c, a, b, x) + gen_nijenhuis(t.J2, c, a, b, x) +
                          gen_nijenhuis(t.J3, c, a, b, x);
            v.record(inf_norm(Vec(gen_torsion(D, c, a, b, x) - N / 6.0)), 0.0, tol, static_cast<int>(p), x,
                     "T^D - N/6 (random pair " + std::to_string(k) + ")");
        }
    return v;
}

std::vector<FamilyResult> family_invariance(Family which, const Triple& base, const Connection& c,
                                            const std::vector<std::pair<double, double>>& params, const Sampler& s,
                                            const Tolerance& tol) {
    const int n = base.J1.n;
    const GenConnection ref = which == Family::J_ab_quat ? canonical_quat(base.J1, base.J2, c, &s, tol)
                                                         : triple_canonical(base.J1, base.J2, c, s, tol);
    std::vector<FamilyResult> out;
    for (const auto& [a, b] : params) {
        family_admissible(which, a, b);
        FamilyMember m = family_build(which, base, a, b, s, tol);
        FamilyResult r;
        r.a = a;
        r.b = b;
        r.expected = m.expected;
        r.actual = m.actual.kind;
        r.square = m.square;
        const GenOperator& partner = family_partner(which, base);
        const GenConnection D = which == Family::K_ab_para ? triple_canonical(partner, m.op, c, s, tol)
                                                           : triple_canonical(m.op, partner, c, s, tol);
        r.agreement = connection_difference(D, ref, n, s, tol);
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace gg
