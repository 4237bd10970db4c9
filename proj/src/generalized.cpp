#include "gengeom/generalized.hpp"

#include <cmath>
#include <numbers>

#include "gengeom/errors.hpp"

namespace gg {

namespace {

int njet_of(const JetPoint& p) { return static_cast<int>(p.size()); }

JVec head(const JVec& v, int n) { return JVec(v.begin(), v.begin() + n); }
JVec tail(const JVec& v, int n) { return JVec(v.begin() + n, v.end()); }

JVec concat(const JVec& a, const JVec& b) {
    JVec r = a;
    r.insert(r.end(), b.begin(), b.end());
    return r;
}

Vec concat(const Vec& a, const Vec& b) {
    Vec r(a.size() + b.size());
    r << a, b;
    return r;
}

MatrixField flat_field(const BilinearField& h) {
    return [m = h.m](const JetPoint& p) { return flat_matrix(m(p)); };
}

MatrixField sharp_field(const BilinearField& h) {
    return [m = h.m](const JetPoint& p) { return sharp_matrix(m(p), p); };
}

} // namespace

GField section(VectorField X, CovectorField eta) {
    return [X = std::move(X), eta = std::move(eta)](const JetPoint& p) { return concat(X(p), eta(p)); };
}

GField frame_section(int i, int n) {
    Vec v = Vec::Zero(2 * n);
    v[i] = 1.0;
    return constant_section(v);
}

GField constant_section(Vec v) { return constant_vector(std::move(v)); }

GField subtract(GField a, GField b) {
    return [a = std::move(a), b = std::move(b)](const JetPoint& p) { return a(p) - b(p); };
}

GField scale(double c, GField s) {
    return [c, s = std::move(s)](const JetPoint& p) { return c * s(p); };
}

GField random_section(Rng& rng, int n) {
    const int m = 2 * n;
    Vec a = rng.vector(m);
    Mat b(m, n), c(m, n), d(m, n);
    for (int k = 0; k < m; ++k)
        for (int j = 0; j < n; ++j) {
            b(k, j) = rng.uniform(-1.0, 1.0);
            c(k, j) = rng.uniform(0.5, 1.5);
            d(k, j) = rng.uniform(0.0, std::numbers::pi);
        }
    return memoize([a, b, c, d, m, n](const JetPoint& p) {
        JVec r(static_cast<std::size_t>(m), Jet(0.0, njet_of(p)));
        for (int k = 0; k < m; ++k) {
            Jet v = Jet::constant(a[k], njet_of(p));
            for (int j = 0; j < n; ++j) v += b(k, j) * sin(c(k, j) * p[j] + d(k, j));
            r[k] = v;
        }
        return r;
    });
}

// ---------------------------------------------------------------------------
// Operators

namespace {

bool same_point(const JetPoint& a, const JetPoint& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].v != b[i].v || a[i].n != b[i].n) return false;
        for (int k = 0; k < a[i].n; ++k)
            if (a[i].d[static_cast<std::size_t>(k)] != b[i].d[static_cast<std::size_t>(k)]) return false;
    }
    return true;
}

} // namespace

GenBlocks BlocksFn::operator()(const JetPoint& p) const {
    Impl& m = *impl_;
    {
        std::lock_guard lock(m.mu);
        for (std::size_t i = 0; i < m.used; ++i)
            if (same_point(m.cache[i].first, p)) return m.cache[i].second;
    }
    GenBlocks b = m.f(p);
    std::lock_guard lock(m.mu);
    m.cache[m.next] = {p, b};
    m.next = (m.next + 1) % m.cache.size();
    m.used = std::max(m.used, m.next == 0 ? m.cache.size() : m.next);
    return b;
}

GField memoize(GField f) {
    struct State {
        GField f;
        std::mutex mu;
        std::array<std::pair<JetPoint, JVec>, 4> cache{};
        std::size_t used = 0, next = 0;
    };
    auto st = std::make_shared<State>();
    st->f = std::move(f);
    return [st](const JetPoint& p) {
        {
            std::lock_guard lock(st->mu);
            for (std::size_t i = 0; i < st->used; ++i)
                if (same_point(st->cache[i].first, p)) return st->cache[i].second;
        }
        JVec v = st->f(p);
        std::lock_guard lock(st->mu);
        st->cache[st->next] = {p, v};
        st->next = (st->next + 1) % st->cache.size();
        st->used = std::max(st->used, st->next == 0 ? st->cache.size() : st->next);
        return v;
    };
}

JMat assemble(const GenBlocks& b) {
    const int n = b.A.rows;
    const int nj = b.A.a.empty() ? 0 : b.A.a[0].n;
    JMat m(2 * n, 2 * n, nj);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            m(i, j) = b.A(i, j);
            m(i, j + n) = b.B(i, j);
            m(i + n, j) = b.C(i, j);
            m(i + n, j + n) = b.D(i, j);
        }
    return m;
}

Mat matrix(const GenOperator& J, const Point& x) { return values(assemble(J.blocks(constant_jets(x)))); }

GenOperator identity_operator(int n) {
    return GenOperator{n,
                       [n](const JetPoint& p) {
                           const int nj = njet_of(p);
                           return GenBlocks{jidentity(n, nj), JMat(n, n, nj), JMat(n, n, nj), jidentity(n, nj)};
                       },
                       "I"};
}

GenOperator compose(const GenOperator& a, const GenOperator& b) {
    if (a.n != b.n) throw DimensionError("operator dimensions differ");
    auto f = [fa = a.blocks, fb = b.blocks](const JetPoint& p) {
        const GenBlocks x = fa(p);
        const GenBlocks y = fb(p);
        return GenBlocks{x.A * y.A + x.B * y.C, x.A * y.B + x.B * y.D, x.C * y.A + x.D * y.C, x.C * y.B + x.D * y.D};
    };
    return GenOperator{a.n, f, a.name + b.name};
}

GenOperator combine(double a, const GenOperator& p, double b, const GenOperator& q) {
    if (p.n != q.n) throw DimensionError("operator dimensions differ");
    auto f = [a, b, fp = p.blocks, fq = q.blocks](const JetPoint& pt) {
        const GenBlocks x = fp(pt);
        const GenBlocks y = fq(pt);
        return GenBlocks{a * x.A + b * y.A, a * x.B + b * y.B, a * x.C + b * y.C, a * x.D + b * y.D};
    };
    return GenOperator{p.n, f, "(" + p.name + "+" + q.name + ")"};
}

GenOperator negate(const GenOperator& p) {
    auto f = [fp = p.blocks](const JetPoint& pt) {
        const GenBlocks x = fp(pt);
        return GenBlocks{-x.A, -x.B, -x.C, -x.D};
    };
    return GenOperator{p.n, f, "-" + p.name};
}

GenOperator block_operator(int n, MatrixField A, MatrixField B, MatrixField C, MatrixField D, std::string name) {
    auto f = [A = std::move(A), B = std::move(B), C = std::move(C), D = std::move(D)](const JetPoint& p) {
        return GenBlocks{A(p), B(p), C(p), D(p)};
    };
    return GenOperator{n, f, std::move(name)};
}

GField apply(const GenOperator& J, GField s) {
    return memoize([f = J.blocks, s = std::move(s)](const JetPoint& p) { return assemble(f(p)) * s(p); });
}

// ---------------------------------------------------------------------------
// Connections

double gen_metric(const BilinearField& h, const Vec& sigma, const Vec& tau, const Point& x) {
    const int n = static_cast<int>(sigma.size()) / 2;
    const Mat hx = value_at(h.m, x);
    const Mat S = metric_inverse(h, x).transpose();
    const Vec a = S * sigma.tail(n);
    const Vec b = S * tau.tail(n);
    return sigma.head(n).dot(hx * tau.head(n)) + a.dot(hx * b);
}

Verdict duality_check(const GenConnection& D, const GenConnection& Dstar, const BilinearField& h, int n,
                      const Sampler& s, const Tolerance& tol) {
    Verdict v;
    std::vector<GField> frame;
    for (int i = 0; i < 2 * n; ++i) frame.push_back(frame_section(i, n));
    const auto& pts = s.points();
    for (std::size_t p = 0; p < pts.size(); ++p) {
        const Point& x = pts[p];
        for (int a = 0; a < 2 * n; ++a)
            for (int b = 0; b < 2 * n; ++b) {
                // h^(e_a, e_b) as a function on the chart
                const ScalarField g = [hm = h.m, a, b, n](const JetPoint& q) {
                    const JMat H = hm(q);
                    const int nj = njet_of(q);
                    if (a < n && b < n) return H(a, b);
                    if (a < n || b < n) return Jet(0.0, nj);
                    const JMat S = sharp_matrix(H, q);
                    Jet r(0.0, nj);
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j) r += S(i, a - n) * H(i, j) * S(j, b - n);
                    return r;
                };
                const Vec grad = differentiate(g, x).second;
                for (int i = 0; i < n; ++i) {
                    const Vec lhs_dir = Vec::Unit(n, i);
                    const double lhs = grad.dot(lhs_dir);
                    const Vec ea = value_at(frame[static_cast<std::size_t>(a)], x);
                    const Vec eb = value_at(frame[static_cast<std::size_t>(b)], x);
                    const double rhs = gen_metric(h, D(frame[i], frame[a], x), eb, x) +
                                       gen_metric(h, ea, Dstar(frame[i], frame[b], x), x);
                    v.record(std::abs(lhs - rhs), std::abs(lhs), tol, static_cast<int>(p), x,
                             "d" + std::to_string(i) + " h^(e" + std::to_string(a) + ", e" + std::to_string(b) + ")");
                }
            }
    }
    return v;
}

Vec nabla_bracket(const Connection& c, const GField& sigma, const GField& tau, const Point& x) {
    const int n = c.dim;
    const Jacobian js = differentiate(sigma, x);
    const Jacobian jt = differentiate(tau, x);
    const Christoffel g = c.gamma(x);
    const Vec X = js.value.head(n), eta = js.value.tail(n);
    const Vec Y = jt.value.head(n), beta = jt.value.tail(n);
    const Vec lie = jt.d.topRows(n) * X - js.d.topRows(n) * Y;
    const Vec form = cov_covector(g, beta, jt.d.bottomRows(n), X) - cov_covector(g, eta, js.d.bottomRows(n), Y);
    return concat(lie, form);
}

GenConnection hat_connection(const Connection& c, const BilinearField& h) {
    const MatrixField S = sharp_field(h);
    auto f = [c, h, S](const GField& sigma, const GField& tau, const Point& x) {
        const int n = c.dim;
        const Vec X = value_at(sigma, x).head(n);
        const Christoffel g = c.gamma(x);
        const Jacobian jt = differentiate(tau, x);
        const Vec dY = cov_vector(g, jt.value.head(n), jt.d.topRows(n), X);
        const VectorField u = [S, tau, n](const JetPoint& p) { return S(p) * tail(tau(p), n); };
        const Jacobian ju = differentiate(u, x);
        const Vec du = cov_vector(g, ju.value, ju.d, X);
        return concat(dY, Vec(value_at(h.m, x).transpose() * du));
    };
    return GenConnection{"hat", f};
}

GenConnection hat_dual(const Connection& c, const BilinearField& h, const Sampler* check, const Tolerance& tol) {
    if (check) {
        const bool sym = symmetry_check(h, Symmetry::Symmetric, *check, tol).ok;
        const bool skew = !sym && symmetry_check(h, Symmetry::Skew, *check, tol).ok;
        if (!sym && !skew) throw NotSignedSymmetric("h is neither symmetric nor skew-symmetric at the samples");
        require_nondegenerate(h, *check);
    }
    const MatrixField F = flat_field(h);
    auto f = [c, h, F](const GField& sigma, const GField& tau, const Point& x) {
        const int n = c.dim;
        const Vec X = value_at(sigma, x).head(n);
        const Christoffel g = c.gamma(x);
        const Jacobian jt = differentiate(tau, x);
        const CovectorField w = [F, tau, n](const JetPoint& p) { return F(p) * head(tau(p), n); };
        const Jacobian jw = differentiate(w, x);
        const Vec dw = cov_covector(g, jw.value, jw.d, X);
        const Vec dgam = cov_covector(g, jt.value.tail(n), jt.d.bottomRows(n), X);
        return concat(Vec(metric_inverse(h, x).transpose() * dw), dgam);
    };
    return GenConnection{"hat_dual", f};
}

GenConnection alpha_connection(const GenConnection& d1, const GenConnection& d2, double alpha) {
    const double a = 0.5 * (1.0 + alpha), b = 0.5 * (1.0 - alpha);
    auto f = [d1, d2, a, b](const GField& sigma, const GField& tau, const Point& x) {
        return Vec(a * d1(sigma, tau, x) + b * d2(sigma, tau, x));
    };
    return GenConnection{"alpha(" + std::to_string(alpha) + ")", f};
}

GenConnection trivial_connection() {
    auto f = [](const GField& sigma, const GField& tau, const Point& x) {
        const Jacobian jt = differentiate(tau, x);
        return Vec(jt.d * value_at(sigma, x).head(static_cast<Eigen::Index>(x.size())));
    };
    return GenConnection{"trivial", f};
}

Vec gen_torsion(const GenConnection& D, const Connection& c, const GField& sigma, const GField& tau, const Point& x) {
    return D(sigma, tau, x) - D(tau, sigma, x) - nabla_bracket(c, sigma, tau, x);
}

Vec gen_nijenhuis(const GenOperator& J, const Connection& c, const GField& sigma, const GField& tau, const Point& x) {
    const Mat Jx = matrix(J, x);
    const GField Js = apply(J, sigma);
    const GField Jt = apply(J, tau);
    return nabla_bracket(c, Js, Jt, x) - Jx * nabla_bracket(c, Js, tau, x) - Jx * nabla_bracket(c, sigma, Jt, x) +
           Jx * (Jx * nabla_bracket(c, sigma, tau, x));
}

Vec cov_operator(const GenConnection& D, const GenOperator& J, const GField& sigma, const GField& tau,
                 const Point& x) {
    return D(sigma, apply(J, tau), x) - matrix(J, x) * D(sigma, tau, x);
}

Vec hat_torsion_formula(const Connection& c, const BilinearField& h, const Vec& sigma, const Vec& tau,
                        const Point& x) {
    const int n = c.dim;
    const Vec X = sigma.head(n), eta = sigma.tail(n), Y = tau.head(n), beta = tau.tail(n);
    const MatrixField S = sharp_field(h);
    const Mat dSX = cov_deriv_map(c, S, Space::Cotangent, Space::Tangent, X, x);
    const Mat dSY = cov_deriv_map(c, S, Space::Cotangent, Space::Tangent, Y, x);
    const Mat hT = value_at(h.m, x).transpose();
    return concat(torsion_formula(c, X, Y, x), Vec(hT * (dSX * beta - dSY * eta)));
}

Vec hat_dual_torsion_formula(const Connection& c, const BilinearField& h, const Vec& sigma, const Vec& tau,
                             const Point& x) {
    const int n = c.dim;
    const Vec X = sigma.head(n), Y = tau.head(n);
    const MatrixField F = flat_field(h);
    const Mat dFX = cov_deriv_map(c, F, Space::Tangent, Space::Cotangent, X, x);
    const Mat dFY = cov_deriv_map(c, F, Space::Tangent, Space::Cotangent, Y, x);
    const Mat S = metric_inverse(h, x).transpose();
    const Vec v = S * (dFX * Y - dFY * X) + torsion_formula(c, X, Y, x);
    return concat(v, Vec(Vec::Zero(n)));
}

Verdict integrability_check(const GenOperator& J, const Connection& c, const Sampler& s, const Tolerance& tol,
                            int extra) {
    Verdict v;
    const int n = c.dim;
    std::vector<GField> frame;
    for (int i = 0; i < 2 * n; ++i) frame.push_back(frame_section(i, n));
    Rng rng(s.seed() ^ 0x5eedULL);
    std::vector<std::pair<GField, GField>> rand_pairs;
    for (int k = 0; k < extra; ++k) {
        GField a = random_section(rng, n);
        GField b = random_section(rng, n);
        rand_pairs.emplace_back(std::move(a), std::move(b));
    }
    const auto& pts = s.points();
    for (std::size_t p = 0; p < pts.size(); ++p) {
        const double scale = matrix(J, pts[p]).cwiseAbs().maxCoeff();
        for (int i = 0; i < 2 * n; ++i)
            for (int j = i + 1; j < 2 * n; ++j) {
                const Vec N = gen_nijenhuis(J, c, frame[i], frame[j], pts[p]);
                v.record(N.cwiseAbs().maxCoeff(), scale, tol, static_cast<int>(p), pts[p],
                         "N(e" + std::to_string(i) + ", e" + std::to_string(j) + ")");
            }
        for (std::size_t k = 0; k < rand_pairs.size(); ++k) {
            const Vec N = gen_nijenhuis(J, c, rand_pairs[k].first, rand_pairs[k].second, pts[p]);
            v.record(N.cwiseAbs().maxCoeff(), scale, tol, static_cast<int>(p), pts[p],
                     "N(random pair " + std::to_string(k) + ")");
        }
    }
    return v;
}

bool is_integrable(const GenOperator& J, const Connection& c, const Sampler& s, const Tolerance& tol) {
    return integrability_check(J, c, s, tol).ok;
}

Verdict frame_check(const Sampler& s, int n, const Tolerance& tol,
                    const std::function<Vec(const GField&, const GField&, const Point&)>& f, const std::string& what) {
    Verdict v;
    std::vector<GField> frame;
    for (int i = 0; i < 2 * n; ++i) frame.push_back(frame_section(i, n));
    const auto& pts = s.points();
    for (std::size_t p = 0; p < pts.size(); ++p)
        for (int i = 0; i < 2 * n; ++i)
            for (int j = 0; j < 2 * n; ++j) {
                const Vec r = f(frame[i], frame[j], pts[p]);
                v.record(r.cwiseAbs().maxCoeff(), 0.0, tol, static_cast<int>(p), pts[p],
                         what + "(e" + std::to_string(i) + ", e" + std::to_string(j) + ")");
            }
    return v;
}

} // namespace gg
