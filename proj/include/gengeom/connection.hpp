#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gengeom/fields.hpp"

namespace gg {

/// Christoffel symbols at one point: G[i](k, j) = Gamma^k_{ij}, so that
/// nabla_{d_i} d_j = Gamma^k_{ij} d_k and (G[i] Y)^k is the connection term of nabla_{d_i} Y.
struct Christoffel {
    std::vector<Mat> G;

    double operator()(int k, int i, int j) const { return G[static_cast<std::size_t>(i)](k, j); }
    int dim() const { return static_cast<int>(G.size()); }
};

Christoffel zero_christoffel(int n);

/// Affine connection given by its Christoffel symbols. Only values are ever needed:
/// every formula in this library is first order in the connection data.
struct Connection {
    int dim = 0;
    std::function<Christoffel(const Point&)> gamma;
    std::string tag;
};

Connection flat_connection(int n);

/// table[k][i][j] holds Gamma^k_{ij}.
Connection christoffel_connection(int n, std::vector<std::vector<std::vector<ExprPtr>>> table);

enum class Space { Tangent, Cotangent };

/// nabla_X Y from the value and Jacobian of Y (dY(k, i) = d_i Y^k).
Vec cov_vector(const Christoffel& g, const Vec& Y, const Mat& dY, const Vec& X);
/// nabla_X eta from the value and Jacobian of eta.
Vec cov_covector(const Christoffel& g, const Vec& eta, const Mat& deta, const Vec& X);

Vec cov_deriv(const Connection& c, const VectorField& Y, const Vec& X, const Point& x);
Vec cov_deriv_covector(const Connection& c, const CovectorField& eta, const Vec& X, const Point& x);

/// nabla_X of a field of linear maps M: in -> out, acting on column vectors.
/// Uses the Leibniz rule (nabla_X M) u = nabla_X(M u) - M nabla_X u.
Mat cov_deriv_map(const Connection& c, const MatrixField& M, Space in, Space out, const Vec& X, const Point& x);

Mat cov_deriv(const Connection& c, const EndoField& J, const Vec& X, const Point& x);
/// (nabla_X h)_{ij}, i.e. (nabla_X h)(Y, Z) = Y^T result Z.
Mat cov_deriv(const Connection& c, const BilinearField& h, const Vec& X, const Point& x);
Mat cov_deriv(const Connection& c, const CoVecMapField& H, const Vec& X, const Point& x);

/// nabla_X Y - nabla_Y X - [X, Y].
Vec torsion(const Connection& c, const VectorField& X, const VectorField& Y, const Point& x);
/// X^i Y^j (Gamma^k_{ij} - Gamma^k_{ji}).
Vec torsion_formula(const Connection& c, const Vec& X, const Vec& Y, const Point& x);

/// (nabla_X h)(Y,Z) - (nabla_Y h)(X,Z) + h(T(X,Y), Z).
double d_nabla_h(const Connection& c, const BilinearField& h, const Vec& X, const Vec& Y, const Vec& Z,
                 const Point& x);

Verdict quasi_statistical_check(const Connection& c, const BilinearField& h, const Sampler& s,
                                const Tolerance& tol = {});
bool is_quasi_statistical(const Connection& c, const BilinearField& h, const Sampler& s, const Tolerance& tol = {});

/// Gamma*^k_{ij} = Gamma^k_{ij} + (h^-1 (nabla_{d_i} h)(d_j, .))^k. When a sampler is given,
/// h is first required to be symmetric or skew and non-degenerate at its points.
Connection dual_connection(const Connection& c, const BilinearField& h, const Sampler* check = nullptr,
                           const Tolerance& tol = {});

/// Koszul formula for symmetric h.
Connection levi_civita(const BilinearField& h, int n);

Verdict parallel_check(const Connection& c, const MatrixField& M, Space in, Space out, const Sampler& s,
                       const Tolerance& tol = {});
bool is_parallel(const Connection& c, const EndoField& J, const Sampler& s, const Tolerance& tol = {});
bool is_parallel(const Connection& c, const BilinearField& h, const Sampler& s, const Tolerance& tol = {});
bool is_parallel(const Connection& c, const VectorField& Y, const Sampler& s, const Tolerance& tol = {});

/// Largest Christoffel difference over the samples.
double christoffel_distance(const Connection& a, const Connection& b, const Sampler& s);

} // namespace gg
