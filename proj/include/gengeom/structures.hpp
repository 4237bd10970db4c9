#pragma once

#include <array>
#include <string>
#include <vector>

#include "gengeom/generalized.hpp"

namespace gg {

/// Sample set and tolerance used to validate builder preconditions. With force set,
/// violated preconditions are appended to warnings instead of raising PreconditionFailed.
struct BuildContext {
    const Sampler& sampler;
    Tolerance tol{};
    bool force = false;
    std::vector<std::string> warnings{};

    void require(const Verdict& v, const std::string& what);
};

struct Triple {
    GenOperator J1, J2, J3;
};

enum class OpKind { AlmostComplex, AlmostProduct, Neither };
enum class TripleKind { Quaternionic, ParaQuaternionic, ComplexProduct, Hyperproduct, None };

std::string to_string(OpKind k);
std::string to_string(TripleKind k);

struct OpClass {
    OpKind kind = OpKind::Neither;
    Verdict complex;   // J^2 + I
    Verdict product;   // J^2 - I
};

OpClass classify_operator(const GenOperator& J, const Sampler& s, const Tolerance& tol = {});

struct TripleClass {
    TripleKind kind = TripleKind::None;
    std::array<OpKind, 3> squares{OpKind::Neither, OpKind::Neither, OpKind::Neither};
    int product_sign = 0;   // J3 = product_sign * J1 J2; 0 when neither sign fits
    bool anticommuting = false;
    bool commuting = false;
    Verdict product;        // J3 -/+ J1 J2
    Verdict relation;       // J1 J2 +/- J2 J1 for the relation found
    Verdict remark;         // J1 J3 + J3 J1 and J2 J3 + J3 J2 (anticommuting kinds only)
    std::string note;
};

TripleClass classify_triple(const GenOperator& J1, const GenOperator& J2, const GenOperator& J3, const Sampler& s,
                            const Tolerance& tol = {});

// Sampled matrix identities used as builder preconditions.
Verdict h_symmetric_check(const EndoField& J, const BilinearField& h, const Sampler& s, const Tolerance& tol);
Verdict commute_check(const EndoField& A, const EndoField& B, const Sampler& s, const Tolerance& tol);
Verdict anticommute_check(const EndoField& A, const EndoField& B, const Sampler& s, const Tolerance& tol);
Verdict operator_relation(const GenOperator& A, const GenOperator& B, double sign, const Sampler& s,
                          const Tolerance& tol);

/// Blocks (J1, -(J1^2+I)h^-1; h, -J1*) and (J2, -(J2^2-I)h^-1; h, -J2*) and their product.
Triple build_pair_para(const BilinearField& h, const EndoField& J1, const EndoField& J2, BuildContext& ctx);

/// The pair built from J1 = J2 = J; J3 is the product.
Triple build_single(const BilinearField& h, const EndoField& J, BuildContext& ctx);
/// The product of the single-J pair written out: (-I, 2Jh^-1; 0, I).
GenOperator single_product_blocks(const BilinearField& h, const EndoField& J, int n);

struct GeneralHResult {
    GenOperator J1, J2;
    Verdict system;        // the three matrix equations for anticommutation
    Verdict anticommute;   // J1 J2 + J2 J1 from the assembled operators
};

GeneralHResult build_general_H(const BilinearField& h, const EndoField& J1, const EndoField& J2,
                               const CoVecMapField& H1, const CoVecMapField& H2, BuildContext& ctx);

struct LambdaResult {
    GenOperator J1, J2;
    GenOperator product;         // closed-form product blocks
    Verdict product_matches;     // closed form vs composed operators
    std::array<Verdict, 2> square_formula;   // J_i^2 vs diag(J_i^2, (J_i*)^2) + lambda_i I
    std::array<bool, 2> complex_by_remark{};
    std::array<bool, 2> product_by_remark{};
    bool anticommute_by_remark = false;
    std::array<OpClass, 2> classes;
};

LambdaResult build_lambda(const BilinearField& h, const EndoField& J1, const EndoField& J2, double l1, double l2,
                          BuildContext& ctx);

struct DiagPair {
    GenOperator J1, J2;
    GenOperator product;   // diag(J1 J2, J1* J2*)
};

DiagPair build_diag_pair(const EndoField& J1, const EndoField& J2, int n);

/// Blocks (J1 J2, 0; h(J2 - J1), J1* J2*).
GenOperator build_on(const BilinearField& h, const EndoField& J1, const EndoField& J2, BuildContext& ctx);
/// The two factors (J_i, 0; h, -J_i*).
std::array<GenOperator, 2> on_factors(const BilinearField& h, const EndoField& J1, const EndoField& J2, int n);

enum class Family { J_ab_para, K_ab_para, J_ab_quat, K_ab_parapair };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

struct FamilyMember {
    GenOperator op;
    OpKind expected = OpKind::Neither;   // from the sign condition on (a, b)
    double expected_square = 0.0;        // op^2 = expected_square * I
    OpClass actual;
    Verdict square;                      // op^2 - expected_square I
};

/// a*base + b*(first base operator composed with the second), with the base operator chosen per family.
/// Base triples are (J, K, JK): para-quaternionic for the para families, quaternionic for J_ab_quat.
FamilyMember family_build(Family which, const Triple& base, double a, double b, const Sampler& s,
                          const Tolerance& tol = {});

/// The base operator a family member should be paired with so the pair anticommutes.
const GenOperator& family_partner(Family which, const Triple& base);
/// The sign condition of the family for (a, b); throws AdmissibilityFailed when none holds.
OpKind family_admissible(Family which, double a, double b, double tol = 1e-12);

} // namespace gg
