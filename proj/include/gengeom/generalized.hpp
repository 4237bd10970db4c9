#pragma once

#include <array>
#include <functional>
#include <memory>
#include <mutex>
#include <type_traits>
#include <string>

#include "gengeom/connection.hpp"
#include "gengeom/fields.hpp"

namespace gg {

/// Section X + eta of TM + T*M as a field: 2n jet components, X first.
using GField = std::function<JVec(const JetPoint&)>;

GField section(VectorField X, CovectorField eta);
/// d_i for i < n, dx^(i-n) for n <= i < 2n.
GField frame_section(int i, int n);
GField constant_section(Vec v);
// scale(ScalarField, GField) and add(GField, GField) come from fields.hpp: a GField is a VectorField of length 2n.
GField subtract(GField a, GField b);
GField scale(double c, GField s);

/// Non-constant section with components a + sum_j b_j sin(c_j x^j + d_j), coefficients from rng.
GField random_section(Rng& rng, int n);

/// Wraps a section so repeated evaluation at the same jet point is served from a small cache.
GField memoize(GField f);

// ---------------------------------------------------------------------------
// Operators

/// Blocks of an endomorphism of TM + T*M acting on (X; eta) as [[A, B], [C, D]].
/// A: T -> T, B: T* -> T, C: T -> T*, D: T* -> T*.
struct GenBlocks {
    JMat A, B, C, D;
};

/// Block evaluator that remembers its last few inputs. Operators are rebuilt from
/// nested closures, so the same point is evaluated many times per check.
class BlocksFn {
public:
    BlocksFn() = default;
    template <class F>
        requires(!std::is_same_v<std::decay_t<F>, BlocksFn> && std::is_invocable_r_v<GenBlocks, F&, const JetPoint&>)
    BlocksFn(F f) : impl_(std::make_shared<Impl>(std::move(f))) {}

    GenBlocks operator()(const JetPoint& p) const;
    explicit operator bool() const { return impl_ != nullptr; }

private:
    struct Impl {
        explicit Impl(std::function<GenBlocks(const JetPoint&)> fn) : f(std::move(fn)) {}
        std::function<GenBlocks(const JetPoint&)> f;
        std::mutex mu;
        std::array<std::pair<JetPoint, GenBlocks>, 4> cache{};
        std::size_t used = 0, next = 0;
    };
    std::shared_ptr<Impl> impl_;
};

struct GenOperator {
    int n = 0;
    BlocksFn blocks;
    std::string name;
};

JMat assemble(const GenBlocks& b);
Mat matrix(const GenOperator& J, const Point& x);

GenOperator identity_operator(int n);
GenOperator compose(const GenOperator& a, const GenOperator& b);
GenOperator combine(double a, const GenOperator& p, double b, const GenOperator& q);
GenOperator negate(const GenOperator& p);

/// Block operator from the four matrix fields.
GenOperator block_operator(int n, MatrixField A, MatrixField B, MatrixField C, MatrixField D, std::string name = {});

GField apply(const GenOperator& J, GField s);

// ---------------------------------------------------------------------------
// Connections on TM + T*M

/// D_sigma tau at x. Only the value of sigma at x matters for a genuine connection;
/// the contract checks assert that.
struct GenConnection {
    std::string tag;
    std::function<Vec(const GField& sigma, const GField& tau, const Point& x)> apply;

    Vec operator()(const GField& sigma, const GField& tau, const Point& x) const { return apply(sigma, tau, x); }
};

/// h(X,Y) + h(h^-1 eta, h^-1 beta) on section values.
double gen_metric(const BilinearField& h, const Vec& sigma, const Vec& tau, const Point& x);

/// X(h^(t, r)) - h^(D t, r) - h^(t, D* r) over frame sections s, t, r.
Verdict duality_check(const GenConnection& D, const GenConnection& Dstar, const BilinearField& h, int n,
                      const Sampler& s, const Tolerance& tol);

/// [X,Y] + nabla_X beta - nabla_Y eta.
Vec nabla_bracket(const Connection& c, const GField& sigma, const GField& tau, const Point& x);

/// nabla_X Y + h(nabla_X(h^-1 beta)).
GenConnection hat_connection(const Connection& c, const BilinearField& h);
/// h^-1(nabla_X(h Z)) + nabla_X gamma. With a sampler, h is checked for a sign symmetry first.
GenConnection hat_dual(const Connection& c, const BilinearField& h, const Sampler* check = nullptr,
                       const Tolerance& tol = {});
/// ((1+a)/2) D1 + ((1-a)/2) D2.
GenConnection alpha_connection(const GenConnection& d1, const GenConnection& d2, double alpha);
/// Coordinate derivative of the section components.
GenConnection trivial_connection();

/// D_sigma tau - D_tau sigma - [sigma, tau]_nabla.
Vec gen_torsion(const GenConnection& D, const Connection& c, const GField& sigma, const GField& tau, const Point& x);

/// [Js,Jt] - J[Js,t] - J[s,Jt] + J(J[s,t]).
Vec gen_nijenhuis(const GenOperator& J, const Connection& c, const GField& sigma, const GField& tau, const Point& x);

/// D_sigma(J tau) - J(D_sigma tau).
Vec cov_operator(const GenConnection& D, const GenOperator& J, const GField& sigma, const GField& tau,
                 const Point& x);

/// Torsion of the hat connection in closed form: T(X,Y) + h((nabla_X h^-1) beta - (nabla_Y h^-1) eta).
Vec hat_torsion_formula(const Connection& c, const BilinearField& h, const Vec& sigma, const Vec& tau,
                        const Point& x);
/// Torsion of the dual hat connection: h^-1((nabla_X h) Y - (nabla_Y h) X + h T(X,Y)).
Vec hat_dual_torsion_formula(const Connection& c, const BilinearField& h, const Vec& sigma, const Vec& tau,
                             const Point& x);

/// N over all pairs of frame sections plus `extra` random non-constant pairs.
Verdict integrability_check(const GenOperator& J, const Connection& c, const Sampler& s, const Tolerance& tol = {},
                            int extra = 8);
bool is_integrable(const GenOperator& J, const Connection& c, const Sampler& s, const Tolerance& tol = {});

/// Largest |D_sigma tau| residual over frame pairs of a connection-valued bilinear expression.
Verdict frame_check(const Sampler& s, int n, const Tolerance& tol,
                    const std::function<Vec(const GField&, const GField&, const Point&)>& f, const std::string& what);

} // namespace gg
