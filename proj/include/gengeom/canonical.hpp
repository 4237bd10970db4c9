#pragma once

#include <array>
#include <string>
#include <vector>

#include "gengeom/structures.hpp"

namespace gg {

/// Complexified section a + i b, both parts real section fields.
struct CField {
    GField re, im;
};

struct CVec {
    Vec re, im;
};

CField complexify(GField s);
CVec operator+(const CVec& a, const CVec& b);
CVec operator-(const CVec& a, const CVec& b);
CVec operator*(const Mat& m, const CVec& v);

/// (s + sign J s) / 2 as a field.
GField project_real(const GenOperator& J, GField s, int sign);
/// Same on a value, with the matrix of J at the point.
Vec project_real(const Mat& J, const Vec& s, int sign);

/// sign = -1: (t - i J t) / 2; sign = +1: (t + i J t) / 2.
CField project_complex(const GenOperator& J, const CField& t, int sign);
CVec project_complex(const Mat& J, const CVec& t, int sign);

/// [a + ib, c + id] = [a,c] - [b,d] + i([a,d] + [b,c]).
CVec complex_bracket(const Connection& c, const CField& s, const CField& t, const Point& x);

/// Six-term bracket of two anticommuting operators. Throws NotAnticommuting when J1 J2 + J2 J1
/// is not small at x.
Vec fn_bracket(const GenOperator& J1, const GenOperator& J2, const Connection& c, const GField& sigma,
               const GField& tau, const Point& x);

/// Requires J^2 = I at the samples (NotProduct otherwise).
void require_product(const GenOperator& J, const Sampler& s, const Tolerance& tol = {});
void require_complex(const GenOperator& J, const Sampler& s, const Tolerance& tol = {});
void require_anticommuting(const GenOperator& A, const GenOperator& B, const Sampler& s, const Tolerance& tol = {});

/// Canonical connection of two anticommuting product structures:
/// ([s-,t+] + J2[s+,J2 t+])^+ + ([s+,t-] + J2[s-,J2 t-])^-, projections taken for J1.
GenConnection canonical_para(const GenOperator& J1, const GenOperator& J2, const Connection& c,
                             const Sampler* check = nullptr, const Tolerance& tol = {});

/// The two product members of the triple (A, B, AB), in order of appearance.
std::pair<GenOperator, GenOperator> product_members(const GenOperator& A, const GenOperator& B, const Sampler& s,
                                                    const Tolerance& tol = {});

/// Sixteen-term averaged-bracket connection of a quaternionic triple.
GenConnection obata(const GenOperator& J1, const GenOperator& J2, const GenOperator& J3, const Connection& c,
                    const Sampler* check = nullptr, const Tolerance& tol = {});

/// Canonical connection of two anticommuting complex structures on complexified sections:
/// ([s-,t+] - J2[s+,J2 t+])^+ + ([s+,t-] - J2[s-,J2 t-])^-.
CVec canonical_quat_complex(const GenOperator& J1, const GenOperator& J2, const Connection& c, const CField& sigma,
                            const CField& tau, const Point& x);

/// Real restriction of the above. The imaginary part is checked against 1e-9 max(1, |re|) and
/// dropped; ResidualImaginary is raised above that.
GenConnection canonical_quat(const GenOperator& J1, const GenOperator& J2, const Connection& c,
                             const Sampler* check = nullptr, const Tolerance& tol = {});

/// Largest imaginary part of canonical_quat_complex on real frame pairs over the samples.
double canonical_quat_imaginary(const GenOperator& J1, const GenOperator& J2, const Connection& c, const Sampler& s);

/// Pointwise difference of two connections over frame pairs.
Verdict connection_difference(const GenConnection& a, const GenConnection& b, int n, const Sampler& s,
                              const Tolerance& tol);

struct EquivalenceReport {
    Verdict fn_bracket;
    Verdict torsion;
    Verdict nijenhuis;   // both structures
    bool fn_zero = false;
    bool torsion_free = false;
    bool integrable = false;
    bool agree() const { return fn_zero == torsion_free && torsion_free == integrable; }
};

/// Evaluates the three equivalent conditions for an anticommuting product pair.
EquivalenceReport equivalence_suite(const GenOperator& J1, const GenOperator& J2, const Connection& c,
                                    const Sampler& s, const Tolerance& tol = {});

struct FamilyResult {
    double a = 0.0, b = 0.0;
    OpKind expected = OpKind::Neither;
    OpKind actual = OpKind::Neither;
    Verdict square;
    Verdict agreement;   // canonical connection of the family pair vs the base one
};

/// For each (a, b): build the family member, pair it with its anticommuting partner,
/// and compare the canonical connection of that pair with the base pair's.
std::vector<FamilyResult> family_invariance(Family which, const Triple& base, const Connection& c,
                                            const std::vector<std::pair<double, double>>& params, const Sampler& s,
                                            const Tolerance& tol = {1e-7, 1e-6});

/// Sections of V_sign(J) for a product structure J: projected frame sections plus `extra`
/// projected random sections.
std::vector<GField> eigen_sections(const GenOperator& J, int sign, const Sampler& s, int extra = 4);

/// D J residual over frame pairs.
Verdict parallel_operator_check(const GenConnection& D, const GenOperator& J, const Sampler& s, const Tolerance& tol);

/// T^D(sigma, tau) with sigma in V+(J1), tau in V-(J1).
Verdict mixed_torsion_check(const GenConnection& D, const GenOperator& J1, const Connection& c, const Sampler& s,
                            const Tolerance& tol);

/// Same for the complexified eigenbundles of a complex J1, on the connection extended to complex sections.
Verdict mixed_torsion_check_complex(const GenOperator& J1, const GenOperator& J2, const Connection& c,
                                    const Sampler& s, const Tolerance& tol);

/// D_sigma tau_l stays in V_l for V1 = V+(J1), V2 = V-(J1), V3 = V+(J2).
Verdict subspace_check(const GenConnection& D, const GenOperator& J1, const GenOperator& J2, const Sampler& s,
                       const Tolerance& tol);

/// Relations between the six-term bracket and the torsion of the canonical connection:
/// [0] on V1 x V1 equals 2 J2 T^D, [1] on V2 x V2 equals -2 J2 T^D,
/// [2] on V1 x V2 equals 2 J1^-[s, J2 t] - 2 J1^+[J2 s, t].
std::array<Verdict, 3> fn_torsion_relations(const GenOperator& J1, const GenOperator& J2, const GenConnection& D,
                                            const Connection& c, const Sampler& s, const Tolerance& tol);

/// Obata torsion minus one sixth of the summed Nijenhuis tensors, on frame pairs and random pairs.
Verdict obata_torsion_identity(const Triple& t, const GenConnection& D, const Connection& c, const Sampler& s,
                               const Tolerance& tol, int pairs = 16);

/// Canonical connection of a base triple: canonical_quat(J1, J2) for quaternionic triples,
/// canonical_para on the product members otherwise.
GenConnection triple_canonical(const GenOperator& A, const GenOperator& B, const Connection& c, const Sampler& s,
                               const Tolerance& tol = {});

} // namespace gg
