#include "gengeom/fields.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "gengeom/errors.hpp"

namespace gg {

// ---------------------------------------------------------------------------
// JMat

JMat::JMat(int r, int c, int njet) : rows(r), cols(c), a(static_cast<std::size_t>(r * c), Jet(0.0, njet)) {}

JMat jidentity(int n, int njet) {
    JMat m(n, n, njet);
    for (int i = 0; i < n; ++i) m(i, i).v = 1.0;
    return m;
}

JMat operator*(const JMat& p, const JMat& q) {
    if (p.cols != q.rows) throw DimensionError("matrix product shape mismatch");
    const int nj = p.a.empty() ? 0 : p.a[0].n;
    JMat r(p.rows, q.cols, nj);
    for (int i = 0; i < p.rows; ++i)
        for (int k = 0; k < p.cols; ++k) {
            const Jet& pik = p(i, k);
            if (pik.v == 0.0 && pik.is_constant()) continue;
            for (int j = 0; j < q.cols; ++j) r(i, j) += pik * q(k, j);
        }
    return r;
}

JMat operator+(const JMat& p, const JMat& q) {
    if (p.rows != q.rows || p.cols != q.cols) throw DimensionError("matrix sum shape mismatch");
    JMat r = p;
    for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] += q.a[i];
    return r;
}

JMat operator-(const JMat& p, const JMat& q) {
    if (p.rows != q.rows || p.cols != q.cols) throw DimensionError("matrix difference shape mismatch");
    JMat r = p;
    for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] -= q.a[i];
    return r;
}

JMat operator-(const JMat& p) {
    JMat r = p;
    for (auto& x : r.a) x = -x;
    return r;
}

JMat operator*(double s, const JMat& p) {
    JMat r = p;
    for (auto& x : r.a) x = s * x;
    return r;
}

JVec operator*(const JMat& p, const JVec& v) {
    if (p.cols != static_cast<int>(v.size())) throw DimensionError("matrix-vector shape mismatch");
    const int nj = v.empty() ? 0 : v[0].n;
    JVec r(static_cast<std::size_t>(p.rows), Jet(0.0, nj));
    for (int i = 0; i < p.rows; ++i)
        for (int j = 0; j < p.cols; ++j) r[i] += p(i, j) * v[j];
    return r;
}

JMat transpose(const JMat& p) {
    const int nj = p.a.empty() ? 0 : p.a[0].n;
    JMat r(p.cols, p.rows, nj);
    for (int i = 0; i < p.rows; ++i)
        for (int j = 0; j < p.cols; ++j) r(j, i) = p(i, j);
    return r;
}

JVec operator+(const JVec& u, const JVec& v) {
    if (u.size() != v.size()) throw DimensionError("vector sum size mismatch");
    JVec r = u;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += v[i];
    return r;
}

JVec operator-(const JVec& u, const JVec& v) {
    if (u.size() != v.size()) throw DimensionError("vector difference size mismatch");
    JVec r = u;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= v[i];
    return r;
}

JVec operator*(const Jet& s, const JVec& v) {
    JVec r = v;
    for (auto& x : r) x = s * x;
    return r;
}

JVec operator*(double s, const JVec& v) {
    JVec r = v;
    for (auto& x : r) x = s * x;
    return r;
}

Jet dot(const JVec& u, const JVec& v) {
    if (u.size() != v.size()) throw DimensionError("dot size mismatch");
    Jet r(0.0, u.empty() ? 0 : u[0].n);
    for (std::size_t i = 0; i < u.size(); ++i) r += u[i] * v[i];
    return r;
}

Mat values(const JMat& m) {
    Mat r(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) r(i, j) = m(i, j).v;
    return r;
}

Vec values(const JVec& v) {
    Vec r(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) r[static_cast<Eigen::Index>(i)] = v[i].v;
    return r;
}

Mat partials(const JMat& m, int k) {
    Mat r(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) r(i, j) = m(i, j).d[k];
    return r;
}

Vec partials(const JVec& v, int k) {
    Vec r(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) r[static_cast<Eigen::Index>(i)] = v[i].d[k];
    return r;
}

JMat lift(const Mat& m, int njet) {
    JMat r(static_cast<int>(m.rows()), static_cast<int>(m.cols()), njet);
    for (int i = 0; i < r.rows; ++i)
        for (int j = 0; j < r.cols; ++j) r(i, j).v = m(i, j);
    return r;
}

JVec lift(const Vec& v, int njet) {
    JVec r(static_cast<std::size_t>(v.size()), Jet(0.0, njet));
    for (Eigen::Index i = 0; i < v.size(); ++i) r[static_cast<std::size_t>(i)].v = v[i];
    return r;
}

namespace {

Point coords_of(const JetPoint& p) {
    Point x(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) x[i] = p[i].v;
    return x;
}

} // namespace

JMat inverse(const JMat& m, const JetPoint& p) {
    if (m.rows != m.cols) throw DimensionError("inverse of non-square matrix");
    const Mat v = values(m);
    const double det = v.determinant();
    if (!(std::abs(det) > kDetThreshold)) throw SingularMetric(coords_of(p), det);
    const Mat inv = v.inverse();
    const int nj = m.a.empty() ? 0 : m.a[0].n;
    JMat r = lift(inv, nj);
    for (int k = 0; k < nj; ++k) {
        const Mat dk = -inv * partials(m, k) * inv;
        for (int i = 0; i < r.rows; ++i)
            for (int j = 0; j < r.cols; ++j) r(i, j).d[k] = dk(i, j);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Field constructors

ScalarField scalar_field(ExprPtr e) {
    return [e = std::move(e)](const JetPoint& p) { return eval(*e, p); };
}

ScalarField constant_scalar(double c) {
    return [c](const JetPoint& p) { return Jet::constant(c, static_cast<int>(p.size())); };
}

VectorField vector_field(std::vector<ExprPtr> comps) {
    return [comps = std::move(comps)](const JetPoint& p) {
        JVec r;
        r.reserve(comps.size());
        for (const auto& e : comps) r.push_back(eval(*e, p));
        return r;
    };
}

VectorField constant_vector(Vec v) {
    return [v = std::move(v)](const JetPoint& p) { return lift(v, static_cast<int>(p.size())); };
}

VectorField basis_vector(int i, int n) {
    Vec v = Vec::Zero(n);
    v[i] = 1.0;
    return constant_vector(v);
}

MatrixField matrix_field(std::vector<std::vector<ExprPtr>> rows) {
    const int r = static_cast<int>(rows.size());
    const int c = r ? static_cast<int>(rows[0].size()) : 0;
    for (const auto& row : rows)
        if (static_cast<int>(row.size()) != c) throw DimensionError("ragged matrix field");
    return [rows = std::move(rows), r, c](const JetPoint& p) {
        JMat m(r, c, static_cast<int>(p.size()));
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) m(i, j) = eval(*rows[i][j], p);
        return m;
    };
}

MatrixField constant_matrix(Mat m) {
    return [m = std::move(m)](const JetPoint& p) { return lift(m, static_cast<int>(p.size())); };
}

VectorField scale(ScalarField f, VectorField v) {
    return [f = std::move(f), v = std::move(v)](const JetPoint& p) { return f(p) * v(p); };
}

VectorField add(VectorField u, VectorField v) {
    return [u = std::move(u), v = std::move(v)](const JetPoint& p) { return u(p) + v(p); };
}

VectorField apply(MatrixField m, VectorField v) {
    return [m = std::move(m), v = std::move(v)](const JetPoint& p) { return m(p) * v(p); };
}

Mat value_at(const MatrixField& m, const Point& x) { return values(m(constant_jets(x))); }
Vec value_at(const VectorField& v, const Point& x) { return values(v(constant_jets(x))); }
double value_at(const ScalarField& f, const Point& x) { return f(constant_jets(x)).v; }

// ---------------------------------------------------------------------------
// Derivative access

namespace {
thread_local DerivativeMode g_mode = DerivativeMode::Automatic;
}

DerivativeMode derivative_mode() { return g_mode; }

ScopedDerivativeMode::ScopedDerivativeMode(DerivativeMode m) : saved_(g_mode) { g_mode = m; }
ScopedDerivativeMode::~ScopedDerivativeMode() { g_mode = saved_; }

Jacobian differentiate(const VectorField& f, const Point& x) {
    const int n = static_cast<int>(x.size());
    Jacobian J;
    if (g_mode == DerivativeMode::Automatic) {
        const JVec v = f(seed(x));
        J.value = values(v);
        J.d.resize(J.value.size(), n);
        for (int i = 0; i < n; ++i) J.d.col(i) = partials(v, i);
        return J;
    }
    J.value = value_at(f, x);
    J.d.resize(J.value.size(), n);
    Point p = x;
    for (int i = 0; i < n; ++i) {
        p[i] = x[i] + kFdStep;
        const Vec fp = value_at(f, p);
        p[i] = x[i] - kFdStep;
        const Vec fm = value_at(f, p);
        p[i] = x[i];
        J.d.col(i) = (fp - fm) / (2.0 * kFdStep);
    }
    return J;
}

MatJacobian differentiate(const MatrixField& f, const Point& x) {
    const int n = static_cast<int>(x.size());
    MatJacobian J;
    if (g_mode == DerivativeMode::Automatic) {
        const JMat m = f(seed(x));
        J.value = values(m);
        for (int i = 0; i < n; ++i) J.d.push_back(partials(m, i));
        return J;
    }
    J.value = value_at(f, x);
    Point p = x;
    for (int i = 0; i < n; ++i) {
        p[i] = x[i] + kFdStep;
        const Mat fp = value_at(f, p);
        p[i] = x[i] - kFdStep;
        const Mat fm = value_at(f, p);
        p[i] = x[i];
        J.d.push_back((fp - fm) / (2.0 * kFdStep));
    }
    return J;
}

std::pair<double, Vec> differentiate(const ScalarField& f, const Point& x) {
    const int n = static_cast<int>(x.size());
    Vec g(n);
    if (g_mode == DerivativeMode::Automatic) {
        const Jet j = f(seed(x));
        for (int i = 0; i < n; ++i) g[i] = j.d[i];
        return {j.v, g};
    }
    const auto gv = fd_gradient([&](std::span<const double> q) { return value_at(f, Point(q.begin(), q.end())); }, x,
                                kFdStep);
    for (int i = 0; i < n; ++i) g[i] = gv[static_cast<std::size_t>(i)];
    return {value_at(f, x), g};
}

// ---------------------------------------------------------------------------
// Chart, sampling, tolerances

void Chart::validate() const {
    if (dim <= 0) throw DimensionError("chart dimension must be positive");
    if (dim > kMaxDim) throw DimensionError("chart dimension exceeds " + std::to_string(kMaxDim));
    if (static_cast<int>(coords.size()) != dim) throw DimensionError("coordinate count differs from dimension");
    if (static_cast<int>(box.size()) != dim) throw DimensionError("box size differs from dimension");
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < i; ++j)
            if (coords[i] == coords[j]) throw DimensionError("duplicate coordinate name '" + coords[i] + "'");
        if (!(box[i].first < box[i].second))
            throw DimensionError("box for '" + coords[i] + "' must satisfy min < max");
    }
}

double Rng::uniform(double lo, double hi) {
    const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

int Rng::index(int n) { return static_cast<int>(uniform(0.0, static_cast<double>(n))); }

Vec Rng::vector(int n, double lo, double hi) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
}

Sampler::Sampler(const Chart& chart, int count, std::uint64_t seed) : chart_(chart), seed_(seed) {
    chart_.validate();
    if (count <= 0) throw DimensionError("sample count must be positive");
    Rng rng(seed);
    points_.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        Point x(static_cast<std::size_t>(chart_.dim));
        for (int i = 0; i < chart_.dim; ++i) x[i] = rng.uniform(chart_.box[i].first, chart_.box[i].second);
        points_.push_back(std::move(x));
    }
}

void Verdict::record(double residual, double scale, const Tolerance& tol, int point_index, const Point& x,
                     const std::string& detail) {
    if (!std::isfinite(residual)) residual = std::numeric_limits<double>::infinity();
    if (residual > max_residual || std::isinf(residual)) max_residual = residual;
    if (!tol.accepts(residual, scale) && ok) {
        ok = false;
        witness = Witness{point_index, x, detail};
    }
}

void Verdict::merge(const Verdict& other) {
    if (other.max_residual > max_residual) max_residual = other.max_residual;
    if (!other.ok && ok) {
        ok = false;
        witness = other.witness;
    }
}

// ---------------------------------------------------------------------------
// Base geometry

Mat metric_inverse(const BilinearField& h, const Point& x) {
    const Mat v = value_at(h.m, x);
    const double det = v.determinant();
    if (!(std::abs(det) > kDetThreshold)) throw SingularMetric(x, det);
    return v.inverse();
}

JMat flat_matrix(const JMat& h) { return transpose(h); }

JMat sharp_matrix(const JMat& h, const JetPoint& p) { return inverse(transpose(h), p); }

Vec flat(const BilinearField& h, const Vec& X, const Point& x) { return value_at(h.m, x).transpose() * X; }

Vec sharp(const BilinearField& h, const Vec& eta, const Point& x) {
    return metric_inverse(h, x).transpose() * eta;
}

Vec adjoint_apply(const EndoField& J, const Vec& eta, const Point& x) {
    return value_at(J.m, x).transpose() * eta;
}

Verdict h_symmetry(const EndoField& J, const BilinearField& h, const Sampler& s, const Tolerance& tol) {
    Verdict v;
    const auto& pts = s.points();
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const Mat Jv = value_at(J.m, pts[k]);
        const Mat hv = value_at(h.m, pts[k]);
        // h(JX,Y) - h(X,JY) on basis pairs is the matrix J^T h - h J
        const Mat r = Jv.transpose() * hv - hv * Jv;
        const double scale = (Jv.transpose() * hv).cwiseAbs().maxCoeff();
        v.record(r.cwiseAbs().maxCoeff(), scale, tol, static_cast<int>(k), pts[k], "h(JX,Y) - h(X,JY)");
    }
    return v;
}

bool is_h_symmetric(const EndoField& J, const BilinearField& h, const Sampler& s, const Tolerance& tol) {
    return h_symmetry(J, h, s, tol).ok;
}

Verdict symmetry_check(const BilinearField& h, Symmetry sym, const Sampler& s, const Tolerance& tol) {
    Verdict v;
    const auto& pts = s.points();
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const Mat hv = value_at(h.m, pts[k]);
        double r = 0.0;
        if (sym == Symmetry::Symmetric) r = (hv - hv.transpose()).cwiseAbs().maxCoeff();
        else if (sym == Symmetry::Skew) r = (hv + hv.transpose()).cwiseAbs().maxCoeff();
        v.record(r, hv.cwiseAbs().maxCoeff(), tol, static_cast<int>(k), pts[k]);
    }
    return v;
}

void require_nondegenerate(const BilinearField& h, const Sampler& s) {
    for (const auto& x : s.points()) metric_inverse(h, x);
}

Vec lie_bracket(const VectorField& X, const VectorField& Y, const Point& x) {
    const Jacobian jx = differentiate(X, x);
    const Jacobian jy = differentiate(Y, x);
    return jy.d * jx.value - jx.d * jy.value;
}

Vec nijenhuis_J(const EndoField& J, const VectorField& X, const VectorField& Y, const Point& x) {
    const VectorField JX = apply(J.m, X);
    const VectorField JY = apply(J.m, Y);
    const Mat Jv = value_at(J.m, x);
    return lie_bracket(JX, JY, x) - Jv * lie_bracket(JX, Y, x) - Jv * lie_bracket(X, JY, x) +
           Jv * Jv * lie_bracket(X, Y, x);
}

std::string to_string(BaseClass::Kind k) {
    switch (k) {
    case BaseClass::Kind::Norden: return "norden";
    case BaseClass::Kind::ParaNorden: return "para_norden";
    case BaseClass::Kind::Neither: return "neither";
    }
    return "neither";
}

BaseClass classify_base(const EndoField& J, const BilinearField& h, const Sampler& s, const Tolerance& tol) {
    BaseClass out;
    out.h_symmetric = h_symmetry(J, h, s, tol);
    const auto& pts = s.points();
    const int n = s.chart().dim;
    Verdict minus, plus;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const Mat Jv = value_at(J.m, pts[k]);
        const Mat J2 = Jv * Jv;
        const double scale = J2.cwiseAbs().maxCoeff();
        minus.record((J2 + Mat::Identity(n, n)).cwiseAbs().maxCoeff(), scale, tol, static_cast<int>(k), pts[k],
                     "J^2 + I");
        plus.record((J2 - Mat::Identity(n, n)).cwiseAbs().maxCoeff(), scale, tol, static_cast<int>(k), pts[k],
                    "J^2 - I");
    }
    if (out.h_symmetric.ok && minus.ok) {
        out.kind = BaseClass::Kind::Norden;
        out.square = minus;
    } else if (out.h_symmetric.ok && plus.ok) {
        out.kind = BaseClass::Kind::ParaNorden;
        out.square = plus;
    } else {
        out.square = minus.max_residual <= plus.max_residual ? minus : plus;
    }
    for (std::size_t k = 0; k < pts.size(); ++k)
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const Vec N = nijenhuis_J(J, basis_vector(i, n), basis_vector(j, n), pts[k]);
                out.nijenhuis.record(N.cwiseAbs().maxCoeff(), 0.0, tol, static_cast<int>(k), pts[k],
                                     "N_J(d" + std::to_string(i) + ", d" + std::to_string(j) + ")");
            }
    out.integrable = out.nijenhuis.ok;
    return out;
}

} // namespace gg
