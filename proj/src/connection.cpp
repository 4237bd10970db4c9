#include "gengeom/connection.hpp"

#include <algorithm>
#include <cmath>

#include "gengeom/errors.hpp"

namespace gg {

Christoffel zero_christoffel(int n) {
    Christoffel g;
    g.G.assign(static_cast<std::size_t>(n), Mat::Zero(n, n));
    return g;
}

Connection flat_connection(int n) {
    return Connection{n, [n](const Point&) { return zero_christoffel(n); }, "flat"};
}

Connection christoffel_connection(int n, std::vector<std::vector<std::vector<ExprPtr>>> table) {
    if (static_cast<int>(table.size()) != n) throw DimensionError("christoffel table must have n upper indices");
    for (const auto& row : table) {
        if (static_cast<int>(row.size()) != n) throw DimensionError("christoffel table row size differs from n");
        for (const auto& col : row)
            if (static_cast<int>(col.size()) != n) throw DimensionError("christoffel table column size differs from n");
    }
    auto eval_at = [n, table = std::move(table)](const Point& x) {
        Christoffel g = zero_christoffel(n);
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const auto& e = table[k][i][j];
                    if (e) g.G[i](k, j) = eval_real(*e, x);
                }
        return g;
    };
    return Connection{n, eval_at, "christoffel"};
}

Vec cov_vector(const Christoffel& g, const Vec& Y, const Mat& dY, const Vec& X) {
    Vec r = dY * X;
    for (int i = 0; i < X.size(); ++i)
        if (X[i] != 0.0) r += X[i] * (g.G[i] * Y);
    return r;
}

Vec cov_covector(const Christoffel& g, const Vec& eta, const Mat& deta, const Vec& X) {
    Vec r = deta * X;
    for (int i = 0; i < X.size(); ++i)
        if (X[i] != 0.0) r -= X[i] * (g.G[i].transpose() * eta);
    return r;
}

Vec cov_deriv(const Connection& c, const VectorField& Y, const Vec& X, const Point& x) {
    const Jacobian j = differentiate(Y, x);
    return cov_vector(c.gamma(x), j.value, j.d, X);
}

Vec cov_deriv_covector(const Connection& c, const CovectorField& eta, const Vec& X, const Point& x) {
    const Jacobian j = differentiate(eta, x);
    return cov_covector(c.gamma(x), j.value, j.d, X);
}

Mat cov_deriv_map(const Connection& c, const MatrixField& M, Space in, Space out, const Vec& X, const Point& x) {
    const MatJacobian j = differentiate(M, x);
    const Christoffel g = c.gamma(x);
    Mat r = Mat::Zero(j.value.rows(), j.value.cols());
    for (int k = 0; k < X.size(); ++k) {
        if (X[k] == 0.0) continue;
        const Mat& G = g.G[k];
        Mat t = j.d[k];
        t += out == Space::Tangent ? Mat(G * j.value) : Mat(-G.transpose() * j.value);
        t += in == Space::Tangent ? Mat(-j.value * G) : Mat(j.value * G.transpose());
        r += X[k] * t;
    }
    return r;
}

Mat cov_deriv(const Connection& c, const EndoField& J, const Vec& X, const Point& x) {
    return cov_deriv_map(c, J.m, Space::Tangent, Space::Tangent, X, x);
}

// h_{ij} read as a map with input index j (tangent) and output index i (cotangent)
Mat cov_deriv(const Connection& c, const BilinearField& h, const Vec& X, const Point& x) {
    return cov_deriv_map(c, h.m, Space::Tangent, Space::Cotangent, X, x);
}

Mat cov_deriv(const Connection& c, const CoVecMapField& H, const Vec& X, const Point& x) {
    return cov_deriv_map(c, H.m, Space::Cotangent, Space::Tangent, X, x);
}

Vec torsion(const Connection& c, const VectorField& X, const VectorField& Y, const Point& x) {
    const Jacobian jx = differentiate(X, x);
    const Jacobian jy = differentiate(Y, x);
    const Christoffel g = c.gamma(x);
    const Vec bracket = jy.d * jx.value - jx.d * jy.value;
    return cov_vector(g, jy.value, jy.d, jx.value) - cov_vector(g, jx.value, jx.d, jy.value) - bracket;
}

Vec torsion_formula(const Connection& c, const Vec& X, const Vec& Y, const Point& x) {
    const Christoffel g = c.gamma(x);
    const int n = static_cast<int>(X.size());
    Vec r = Vec::Zero(n);
    for (int i = 0; i < n; ++i) r += X[i] * (g.G[i] * Y);
    for (int j = 0; j < n; ++j) r -= Y[j] * (g.G[j] * X);
    return r;
}

double d_nabla_h(const Connection& c, const BilinearField& h, const Vec& X, const Vec& Y, const Vec& Z,
                 const Point& x) {
    const Mat hx = value_at(h.m, x);
    const Mat dX = cov_deriv(c, h, X, x);
    const Mat dY = cov_deriv(c, h, Y, x);
    const Vec T = torsion_formula(c, X, Y, x);
    return Y.dot(dX * Z) - X.dot(dY * Z) + T.dot(hx * Z);
}

Verdict quasi_statistical_check(const Connection& c, const BilinearField& h, const Sampler& s, const Tolerance& tol) {
    Verdict v;
    const int n = s.chart().dim;
    const auto& pts = s.points();
    const Mat I = Mat::Identity(n, n);
    for (std::size_t p = 0; p < pts.size(); ++p) {
        const Point& x = pts[p];
        const Mat hx = value_at(h.m, x);
        std::vector<Mat> dh;
        for (int i = 0; i < n; ++i) dh.push_back(cov_deriv(c, h, I.col(i), x));
        const double scale = hx.cwiseAbs().maxCoeff();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const Vec T = torsion_formula(c, I.col(i), I.col(j), x);
                for (int k = 0; k < n; ++k) {
                    const double r = dh[i](j, k) - dh[j](i, k) + T.dot(hx.col(k));
                    v.record(std::abs(r), scale, tol, static_cast<int>(p), x,
                             "d h(d" + std::to_string(i) + ",d" + std::to_string(j) + ",d" + std::to_string(k) + ")");
                }
            }
    }
    return v;
}

bool is_quasi_statistical(const Connection& c, const BilinearField& h, const Sampler& s, const Tolerance& tol) {
    return quasi_statistical_check(c, h, s, tol).ok;
}

Connection dual_connection(const Connection& c, const BilinearField& h, const Sampler* check, const Tolerance& tol) {
    if (check) {
        const bool sym = symmetry_check(h, Symmetry::Symmetric, *check, tol).ok;
        const bool skew = !sym && symmetry_check(h, Symmetry::Skew, *check, tol).ok;
        if (!sym && !skew) throw NotSignedSymmetric("h is neither symmetric nor skew-symmetric at the samples");
        require_nondegenerate(h, *check);
    }
    auto gamma = [c, h](const Point& x) {
        const int n = c.dim;
        Christoffel g = c.gamma(x);
        const Mat S = metric_inverse(h, x).transpose();
        const Mat I = Mat::Identity(n, n);
        for (int i = 0; i < n; ++i) {
            const Mat Ci = cov_deriv(c, h, I.col(i), x);
            g.G[i] += S * Ci.transpose();
        }
        return g;
    };
    return Connection{c.dim, gamma, "dual(" + c.tag + ")"};
}

Connection levi_civita(const BilinearField& h, int n) {
    auto gamma = [h](const Point& x) {
        const MatJacobian j = differentiate(h.m, x);
        const int n = static_cast<int>(x.size());
        const double det = j.value.determinant();
        if (!(std::abs(det) > kDetThreshold)) throw SingularMetric(x, det);
        const Mat inv = j.value.inverse();
        Christoffel g = zero_christoffel(n);
        for (int i = 0; i < n; ++i)
            for (int jj = 0; jj < n; ++jj) {
                Vec low(n);
                for (int l = 0; l < n; ++l) low[l] = 0.5 * (j.d[i](jj, l) + j.d[jj](i, l) - j.d[l](i, jj));
                g.G[i].col(jj) = inv * low;
            }
        return g;
    };
    return Connection{n, gamma, "levi_civita"};
}

Verdict parallel_check(const Connection& c, const MatrixField& M, Space in, Space out, const Sampler& s,
                       const Tolerance& tol) {
    Verdict v;
    const int n = s.chart().dim;
    const Mat I = Mat::Identity(n, n);
    const auto& pts = s.points();
    for (std::size_t p = 0; p < pts.size(); ++p) {
        const double scale = value_at(M, pts[p]).cwiseAbs().maxCoeff();
        for (int i = 0; i < n; ++i) {
            const Mat d = cov_deriv_map(c, M, in, out, I.col(i), pts[p]);
            v.record(d.cwiseAbs().maxCoeff(), scale, tol, static_cast<int>(p), pts[p],
                     "direction d" + std::to_string(i));
        }
    }
    return v;
}

bool is_parallel(const Connection& c, const EndoField& J, const Sampler& s, const Tolerance& tol) {
    return parallel_check(c, J.m, Space::Tangent, Space::Tangent, s, tol).ok;
}

bool is_parallel(const Connection& c, const BilinearField& h, const Sampler& s, const Tolerance& tol) {
    return parallel_check(c, h.m, Space::Tangent, Space::Cotangent, s, tol).ok;
}

bool is_parallel(const Connection& c, const VectorField& Y, const Sampler& s, const Tolerance& tol) {
    Verdict v;
    const int n = s.chart().dim;
    const Mat I = Mat::Identity(n, n);
    const auto& pts = s.points();
    for (std::size_t p = 0; p < pts.size(); ++p)
        for (int i = 0; i < n; ++i)
            v.record(cov_deriv(c, Y, I.col(i), pts[p]).cwiseAbs().maxCoeff(), 0.0, tol, static_cast<int>(p), pts[p]);
    return v.ok;
}

double christoffel_distance(const Connection& a, const Connection& b, const Sampler& s) {
    double worst = 0.0;
    for (const auto& x : s.points()) {
        const Christoffel ga = a.gamma(x);
        const Christoffel gb = b.gamma(x);
        for (std::size_t i = 0; i < ga.G.size(); ++i)
            worst = std::max(worst, (ga.G[i] - gb.G[i]).cwiseAbs().maxCoeff());
    }
    return worst;
}

} // namespace gg
