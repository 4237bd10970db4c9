#include "gengeom/identities.hpp"

#include "gengeom/errors.hpp"

namespace gg {

namespace {

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

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

template <class F>
Verdict over_pairs(const Sampler& s, const Tolerance& tol, const std::vector<std::pair<GField, GField>>& pairs,
                   const std::string& what, F&& f) {
    Verdict v;
    const auto& pts = s.points();
    for (std::size_t p = 0; p < pts.size(); ++p)
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            const auto [res, scale] = f(pairs[k].first, pairs[k].second, pts[p]);
            v.record(res, scale, tol, static_cast<int>(p), pts[p], what + " (pair " + std::to_string(k) + ")");
        }
    return v;
}

// Constant coordinate vectors e_i plus a few random constant vectors.
std::vector<Vec> test_vectors(int n, std::uint64_t seed, int extra = 2) {
    std::vector<Vec> out;
    for (int i = 0; i < n; ++i) out.push_back(Vec::Unit(n, i));
    Rng rng(seed);
    for (int k = 0; k < extra; ++k) out.push_back(rng.vector(n));
    return out;
}

Vec cat(const Vec& a, const Vec& b) {
    Vec r(a.size() + b.size());
    r << a, b;
    return r;
}

MatrixField flat_of(const BilinearField& h) {
    return [m = h.m](const JetPoint& p) { return flat_matrix(m(p)); };
}

GField vector_section(const Vec& X) {
    return section(constant_vector(X), constant_vector(Vec::Zero(X.size())));
}

// The covector field h(X) for a constant X.
GField flat_section(const BilinearField& h, const Vec& X) {
    return section(constant_vector(Vec::Zero(X.size())), apply(flat_of(h), constant_vector(X)));
}

// Helpers evaluated at one point.
struct Local {
    const Connection& c;
    const BilinearField& h;
    const Point& x;
    Mat hm, S;

    Local(const Connection& c_, const BilinearField& h_, const Point& x_) : c(c_), h(h_), x(x_) {
        hm = value_at(h.m, x);
        S = hm.transpose().inverse();
    }
    // (nabla_Z h)(W, .)
    Vec dh(const Vec& Z, const Vec& W) const { return cov_deriv(c, h, Z, x).transpose() * W; }
    Vec flat(const Vec& W) const { return hm.transpose() * W; }
    Vec T(const Vec& a, const Vec& b) const { return torsion_formula(c, a, b, x); }
};

} // namespace

Verdict propagation_quaternionic(const Triple& t, const Connection& c, const Sampler& s, const Tolerance& tol,
                                 int pairs) {
    const auto rp = random_pairs(s.seed() ^ 0x1a1aULL, c.dim, pairs);
    return over_pairs(s, tol, rp, "2 N3 - expansion", [&](const GField& a, const GField& b, const Point& x) {
        const Mat m1 = matrix(t.J1, x), m2 = matrix(t.J2, x);
        const GField a1 = apply(t.J1, a), a2 = apply(t.J2, a), b1 = apply(t.J1, b), b2 = apply(t.J2, b);
        auto N1 = [&](const GField& p, const GField& q) { return gen_nijenhuis(t.J1, c, p, q, x); };
        auto N2 = [&](const GField& p, const GField& q) { return gen_nijenhuis(t.J2, c, p, q, x); };
        const Vec lhs = 2.0 * gen_nijenhuis(t.J3, c, a, b, x);
        const Vec rhs = N1(a2, b2) + N2(a1, b1) - m1 * N2(a1, b) - m1 * N2(a, b1) + N2(a, b) - m2 * N1(a2, b) -
                        m2 * N1(a, b2) + N1(a, b);
        return std::pair{inf_norm(Vec(lhs - rhs)), inf_norm(lhs)};
    });
}

std::array<Verdict, 2> propagation_para(const Triple& t, const Connection& c, const Sampler& s, const Tolerance& tol,
                                        int pairs) {
    const auto rp = random_pairs(s.seed() ^ 0x2b2bULL, c.dim, pairs);
    Verdict first = over_pairs(s, tol, rp, "2 N3 - expansion", [&](const GField& a, const GField& b, const Point& x) {
        const Mat m1 = matrix(t.J1, x), m2 = matrix(t.J2, x);
        const GField a1 = apply(t.J1, a), a2 = apply(t.J2, a), b1 = apply(t.J1, b), b2 = apply(t.J2, b);
        auto N1 = [&](const GField& p, const GField& q) { return gen_nijenhuis(t.J1, c, p, q, x); };
        auto N2 = [&](const GField& p, const GField& q) { return gen_nijenhuis(t.J2, c, p, q, x); };
        const Vec lhs = 2.0 * gen_nijenhuis(t.J3, c, a, b, x);
        const Vec rhs = N1(a2, b2) + N2(a1, b1) - m1 * N2(a1, b) - m1 * N2(a, b1) + N2(a, b) - m2 * N1(a2, b) -
                        m2 * N1(a, b2) - N1(a, b);
        return std::pair{inf_norm(Vec(lhs - rhs)), inf_norm(lhs)};
    });
    Verdict second = over_pairs(s, tol, rp, "2 N1 - expansion", [&](const GField& a, const GField& b, const Point& x) {
        const Mat m2 = matrix(t.J2, x), m3 = matrix(t.J3, x);
        const GField a2 = apply(t.J2, a), a3 = apply(t.J3, a), b2 = apply(t.J2, b), b3 = apply(t.J3, b);
        auto N2 = [&](const GField& p, const GField& q) { return gen_nijenhuis(t.J2, c, p, q, x); };
        auto N3 = [&](const GField& p, const GField& q) { return gen_nijenhuis(t.J3, c, p, q, x); };
        const Vec lhs = 2.0 * gen_nijenhuis(t.J1, c, a, b, x);
        const Vec rhs = N2(a3, b3) + N3(a2, b2) - m2 * N3(a2, b) - m2 * N3(a, b2) - N3(a, b) - m3 * N2(a3, b) -
                        m3 * N2(a, b3) - N2(a, b);
        return std::pair{inf_norm(Vec(lhs - rhs)), inf_norm(lhs)};
    });
    return {first, second};
}

std::array<Verdict, 2> single_cov_formulas(const BilinearField& h, const EndoField& J, const Connection& c,
                                           const Sampler& s, const Tolerance& tol) {
    const int n = c.dim;
    const GenOperator P = single_product_blocks(h, J, n);
    const GenConnection hat = hat_connection(c, h);
    const GenConnection dual = hat_dual(c, h);
    const MatrixField Jt = [m = J.m](const JetPoint& p) { return transpose(m(p)); };
    const auto rp = random_pairs(s.seed() ^ 0x3c3cULL, n, 6);
    auto formula = [&](bool is_dual) {
        return [&, is_dual](const GField& a, const GField& b, const Point& x) {
            const Vec sv = value_at(a, x), tv = value_at(b, x);
            const Vec X = sv.head(n), beta = tv.tail(n);
            const Mat S = metric_inverse(h, x).transpose();
            Vec expect;
            if (!is_dual) expect = 2.0 * cov_deriv(c, J, X, x) * (S * beta);
            else expect = 2.0 * S * (cov_deriv_map(c, Jt, Space::Cotangent, Space::Cotangent, X, x) * beta);
            const Vec got = cov_operator(is_dual ? dual : hat, P, a, b, x);
            const Vec e = cat(expect, Vec::Zero(n));
            return std::pair{inf_norm(Vec(got - e)), inf_norm(e)};
        };
    };
    return {over_pairs(s, tol, rp, "(hat nabla J^) - 2 (nabla J) h^-1 beta", formula(false)),
            over_pairs(s, tol, rp, "(hat nabla* J^) - 2 h^-1 (nabla J*) beta", formula(true))};
}

std::array<Verdict, 3> pair_nijenhuis_closed_forms(const BilinearField& h, const EndoField& J, double e,
                                                   const Connection& c, const Sampler& s, const Tolerance& tol) {
    const int n = c.dim;
    // (J, -(J^2 + e I) h^-1; h, -J*)
    const MatrixField Jm = J.m;
    const MatrixField Sf = [m = h.m](const JetPoint& p) { return sharp_matrix(m(p), p); };
    const GenOperator op = block_operator(
        n, Jm,
        [Jm, Sf, e, n](const JetPoint& p) {
            const JMat j = Jm(p);
            const JMat q = j * j + e * jidentity(n, static_cast<int>(p.size()));
            return JMat(-1.0 * (q * Sf(p)));
        },
        flat_of(h), [Jm](const JetPoint& p) { return JMat(-1.0 * transpose(Jm(p))); });
    const auto vecs = test_vectors(n, s.seed() ^ 0x4d4dULL);
    std::array<Verdict, 3> out;
    const auto& pts = s.points();
    for (std::size_t p = 0; p < pts.size(); ++p) {
        const Point& x = pts[p];
        const Local L(c, h, x);
        const Mat j = value_at(J.m, x);
        const Mat Q = j * j + e * Mat::Identity(n, n);
        for (const Vec& X : vecs)
            for (const Vec& Y : vecs) {
                const Vec JX = j * X, JY = j * Y, QX = Q * X, QY = Q * Y;
                const Vec w = L.dh(X, Y) - L.dh(Y, X) + L.flat(L.T(X, Y));
                const Vec NJ = nijenhuis_J(J, constant_vector(X), constant_vector(Y), x);
                const Vec a = cat(NJ + Q * L.S * w, L.dh(JX, Y) - L.dh(Y, JX) + L.flat(L.T(JX, Y)) + L.dh(X, JY) -
                                                        L.dh(JY, X) + L.flat(L.T(X, JY)));
                const Vec na = gen_nijenhuis(op, c, vector_section(X), vector_section(Y), x);
                out[0].record(inf_norm(Vec(na - a)), inf_norm(na), tol, static_cast<int>(p), x, "N(X, Y)");

                const Vec b = cat(L.S * (L.dh(QY, QX) - L.dh(QX, QY) + L.flat(L.T(QY, QX))), Vec::Zero(n));
                const Vec nb = gen_nijenhuis(op, c, flat_section(h, X), flat_section(h, Y), x);
                out[1].record(inf_norm(Vec(nb - b)), inf_norm(nb), tol, static_cast<int>(p), x, "N(hX, hY)");

                const Vec u = L.dh(X, QY) - L.dh(QY, X) + L.flat(L.T(X, QY));
                const Vec cv = cat(L.S * (L.dh(JX, QY) - L.dh(QY, JX) + L.flat(L.T(JX, QY))) - j * (L.S * u), -u);
                const Vec nc = gen_nijenhuis(op, c, vector_section(X), flat_section(h, Y), x);
                out[2].record(inf_norm(Vec(nc - cv)), inf_norm(nc), tol, static_cast<int>(p), x, "N(X, hY)");
            }
    }
    return out;
}

Verdict single_nijenhuis_criterion(const BilinearField& h, const EndoField& J, const Connection& c, const Sampler& s,
                                   const Tolerance& tol) {
    const int n = c.dim;
    const GenOperator P = single_product_blocks(h, J, n);
    const MatrixField Jt = [m = J.m](const JetPoint& p) { return transpose(m(p)); };
    const auto vecs = test_vectors(n, s.seed() ^ 0x5e5eULL);
    Verdict v;
    const auto& pts = s.points();
    for (std::size_t p = 0; p < pts.size(); ++p) {
        const Point& x = pts[p];
        const Local L(c, h, x);
        const Mat j = value_at(J.m, x);
        for (const Vec& X : vecs)
            for (const Vec& Y : vecs) {
                const Vec JX = j * X, JY = j * Y;
                const Vec rhs = cov_deriv_map(c, Jt, Space::Cotangent, Space::Cotangent, JX, x) * L.flat(Y) -
                                cov_deriv_map(c, Jt, Space::Cotangent, Space::Cotangent, JY, x) * L.flat(X);
                const Vec lhs = L.dh(JX, JY) - L.dh(JY, JX) + L.flat(L.T(JX, JY));
                const Vec expect = cat(4.0 * L.S * (rhs - lhs), Vec::Zero(n));
                const Vec N = gen_nijenhuis(P, c, flat_section(h, X), flat_section(h, Y), x);
                v.record(inf_norm(Vec(N - expect)), inf_norm(N), tol, static_cast<int>(p), x, "N(hX, hY)");
            }
    }
    return v;
}

namespace {

// f = 1 + x0 x_last + sin(x0), non-constant in every dimension >= 1.
ScalarField test_function(int n) {
    return [n](const JetPoint& p) {
        const int nj = static_cast<int>(p.size());
        return Jet::constant(1.0, nj) + p[0] * p[static_cast<std::size_t>(n - 1)] + sin(p[0]);
    };
}

} // namespace

Verdict connection_contract(const GenConnection& D, int n, const Sampler& s, const Tolerance& tol) {
    const ScalarField f = test_function(n);
    const auto rp = random_pairs(s.seed() ^ 0x6f6fULL, n, 4);
    return over_pairs(s, tol, rp, D.tag + " contract", [&](const GField& a, const GField& b, const Point& x) {
        const auto [fv, df] = differentiate(f, x);
        const Vec base = D(a, b, x);
        const Vec sv = value_at(a, x);
        const Vec tensorial = D(scale(f, a), b, x) - fv * base;
        const Vec leibniz = D(a, scale(f, b), x) - (df.dot(sv.head(n)) * value_at(b, x) + fv * base);
        return std::pair{std::max(inf_norm(tensorial), inf_norm(leibniz)), inf_norm(base)};
    });
}

Verdict nijenhuis_bilinearity(const GenOperator& J, const Connection& c, const Sampler& s, const Tolerance& tol) {
    const int n = c.dim;
    const ScalarField f = test_function(n);
    const auto rp = random_pairs(s.seed() ^ 0x7a7aULL, n, 4);
    return over_pairs(s, tol, rp, "N bilinearity", [&](const GField& a, const GField& b, const Point& x) {
        const double fv = value_at(f, x);
        const Vec N = gen_nijenhuis(J, c, a, b, x);
        const Vec r1 = gen_nijenhuis(J, c, scale(f, a), b, x) - fv * N;
        const Vec r2 = gen_nijenhuis(J, c, a, scale(f, b), x) - fv * N;
        return std::pair{std::max(inf_norm(r1), inf_norm(r2)), inf_norm(N)};
    });
}

} // namespace gg
