#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gengeom/expr.hpp"
#include "gengeom/jet.hpp"

namespace gg {

using Point = std::vector<double>;
using JetPoint = std::vector<Jet>;
using JVec = std::vector<Jet>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Jet-valued matrices

struct JMat {
    int rows = 0;
    int cols = 0;
    std::vector<Jet> a;

    JMat() = default;
    JMat(int r, int c, int njet);

    Jet& operator()(int i, int j) { return a[static_cast<std::size_t>(i * cols + j)]; }
    const Jet& operator()(int i, int j) const { return a[static_cast<std::size_t>(i * cols + j)]; }
};

JMat jidentity(int n, int njet);
JMat operator*(const JMat& p, const JMat& q);
JMat operator+(const JMat& p, const JMat& q);
JMat operator-(const JMat& p, const JMat& q);
JMat operator-(const JMat& p);
JMat operator*(double s, const JMat& p);
JVec operator*(const JMat& p, const JVec& v);
JMat transpose(const JMat& p);

JVec operator+(const JVec& u, const JVec& v);
JVec operator-(const JVec& u, const JVec& v);
JVec operator*(const Jet& s, const JVec& v);
JVec operator*(double s, const JVec& v);
Jet dot(const JVec& u, const JVec& v);

/// Inverse via the value inverse and d(P^-1) = -P^-1 dP P^-1. Throws SingularMetric
/// (reporting the coordinates in p) when |det| <= 1e-10.
JMat inverse(const JMat& m, const JetPoint& p);

Mat values(const JMat& m);
Vec values(const JVec& v);
Mat partials(const JMat& m, int i);
Vec partials(const JVec& v, int i);
JMat lift(const Mat& m, int njet);
JVec lift(const Vec& v, int njet);

inline constexpr double kDetThreshold = 1e-10;

// ---------------------------------------------------------------------------
// Fields

using ScalarField = std::function<Jet(const JetPoint&)>;
using VectorField = std::function<JVec(const JetPoint&)>;
using CovectorField = VectorField;
using MatrixField = std::function<JMat(const JetPoint&)>;

enum class Symmetry { Symmetric, Skew, General };

/// (1,1)-tensor J with (JX)^i = J(i,j) X^j.
struct EndoField {
    MatrixField m;
};

/// (0,2)-tensor h with h(X,Y) = X^i h(i,j) Y^j.
struct BilinearField {
    MatrixField m;
    Symmetry sym = Symmetry::Symmetric;
};

/// Morphism T*M -> TM with (H eta)^i = H(i,j) eta_j.
struct CoVecMapField {
    MatrixField m;
};

ScalarField scalar_field(ExprPtr e);
ScalarField constant_scalar(double c);
VectorField vector_field(std::vector<ExprPtr> comps);
VectorField constant_vector(Vec v);
VectorField basis_vector(int i, int n);
MatrixField matrix_field(std::vector<std::vector<ExprPtr>> rows);
MatrixField constant_matrix(Mat m);

VectorField scale(ScalarField f, VectorField v);
VectorField add(VectorField u, VectorField v);
VectorField apply(MatrixField m, VectorField v);

Mat value_at(const MatrixField& m, const Point& x);
Vec value_at(const VectorField& v, const Point& x);
double value_at(const ScalarField& f, const Point& x);

// ---------------------------------------------------------------------------
// Derivative access. Every first derivative of a field goes through these
// functions; a thread-local switch replaces AD by central differences so that
// whole checks can be re-run against the finite-difference oracle.

enum class DerivativeMode { Automatic, FiniteDifference };

DerivativeMode derivative_mode();

class ScopedDerivativeMode {
public:
    explicit ScopedDerivativeMode(DerivativeMode m);
    ~ScopedDerivativeMode();
    ScopedDerivativeMode(const ScopedDerivativeMode&) = delete;
    ScopedDerivativeMode& operator=(const ScopedDerivativeMode&) = delete;

private:
    DerivativeMode saved_;
};

inline constexpr double kFdStep = 1e-5;

/// Value and Jacobian d(k, i) = d_i F^k of a vector-valued field.
struct Jacobian {
    Vec value;
    Mat d;
};

/// Value and partial derivative matrices d[i] = d_i M of a matrix field.
struct MatJacobian {
    Mat value;
    std::vector<Mat> d;
};

Jacobian differentiate(const VectorField& f, const Point& x);
MatJacobian differentiate(const MatrixField& f, const Point& x);
std::pair<double, Vec> differentiate(const ScalarField& f, const Point& x);

// ---------------------------------------------------------------------------
// Chart, sampling, tolerances

struct Chart {
    int dim = 0;
    std::vector<std::string> coords;
    std::vector<std::pair<double, double>> box;

    void validate() const;
};

/// mt19937_64 with an explicit 53-bit mapping to [0,1); std distributions are
/// implementation-defined, this keeps sampled points identical across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform(double lo, double hi);
    int index(int n);
    Vec vector(int n, double lo = -1.0, double hi = 1.0);

private:
    std::mt19937_64 eng_;
};

class Sampler {
public:
    Sampler(const Chart& chart, int count = 32, std::uint64_t seed = 42);
    const std::vector<Point>& points() const { return points_; }
    const Chart& chart() const { return chart_; }
    std::uint64_t seed() const { return seed_; }

private:
    Chart chart_;
    std::uint64_t seed_;
    std::vector<Point> points_;
};

struct Tolerance {
    double atol = 1e-8;
    double rtol = 1e-6;
    bool accepts(double residual, double scale = 0.0) const { return residual <= atol + rtol * scale; }
};

struct Witness {
    int point_index = -1;
    Point x;
    std::string detail;
};

/// Outcome of a sampled identity check: worst residual and the first failing sample.
struct Verdict {
    bool ok = true;
    double max_residual = 0.0;
    std::optional<Witness> witness;

    void record(double residual, double scale, const Tolerance& tol, int point_index, const Point& x,
                const std::string& detail = {});
    void merge(const Verdict& other);
};

// ---------------------------------------------------------------------------
// Base geometry

/// Plain matrix inverse of h_ij at x.
Mat metric_inverse(const BilinearField& h, const Point& x);

/// Matrix of h as the map X -> h(X, .), i.e. h^T.
JMat flat_matrix(const JMat& h);
/// Matrix of the inverse of X -> h(X, .), i.e. (h^T)^-1.
JMat sharp_matrix(const JMat& h, const JetPoint& p);

Vec flat(const BilinearField& h, const Vec& X, const Point& x);
Vec sharp(const BilinearField& h, const Vec& eta, const Point& x);

/// (J* eta)_j = eta_i J^i_j.
Vec adjoint_apply(const EndoField& J, const Vec& eta, const Point& x);

Verdict h_symmetry(const EndoField& J, const BilinearField& h, const Sampler& s, const Tolerance& tol);
bool is_h_symmetric(const EndoField& J, const BilinearField& h, const Sampler& s, const Tolerance& tol = {});

/// Worst deviation of h from symmetric / skew-symmetric over the samples.
Verdict symmetry_check(const BilinearField& h, Symmetry sym, const Sampler& s, const Tolerance& tol);

/// Throws SingularMetric at the first sample with |det h| <= 1e-10.
void require_nondegenerate(const BilinearField& h, const Sampler& s);

/// [X,Y]^k = X^j d_j Y^k - Y^j d_j X^k.
Vec lie_bracket(const VectorField& X, const VectorField& Y, const Point& x);

/// [JX,JY] - J[JX,Y] - J[X,JY] + J^2[X,Y].
Vec nijenhuis_J(const EndoField& J, const VectorField& X, const VectorField& Y, const Point& x);

struct BaseClass {
    enum class Kind { Norden, ParaNorden, Neither };
    Kind kind = Kind::Neither;
    bool integrable = false;
    Verdict h_symmetric;
    Verdict square;       // residual of J^2 -/+ I for the reported kind
    Verdict nijenhuis;
};

std::string to_string(BaseClass::Kind k);

BaseClass classify_base(const EndoField& J, const BilinearField& h, const Sampler& s, const Tolerance& tol = {});

} // namespace gg
