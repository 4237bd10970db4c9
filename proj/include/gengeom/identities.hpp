#pragma once

#include <array>

#include "gengeom/structures.hpp"

namespace gg {

/// Eight-term expansion of 2 N_{J3} in terms of N_{J1}, N_{J2} for a quaternionic triple.
Verdict propagation_quaternionic(const Triple& t, const Connection& c, const Sampler& s, const Tolerance& tol,
                                 int pairs = 8);

/// The two expansions for a para-quaternionic triple (complex J1): [0] gives 2 N_{J3}, [1] gives 2 N_{J1}.
std::array<Verdict, 2> propagation_para(const Triple& t, const Connection& c, const Sampler& s, const Tolerance& tol,
                                        int pairs = 8);

/// For the single-J product (-I, 2Jh^-1; 0, I):
/// [0] (hat nabla_s J^) t = (2 (nabla_X J) h^-1 beta; 0),
/// [1] (hat nabla*_s J^) t = (2 h^-1 (nabla_X J*) beta; 0).
std::array<Verdict, 2> single_cov_formulas(const BilinearField& h, const EndoField& J, const Connection& c,
                                           const Sampler& s, const Tolerance& tol);

/// Closed forms of N for (J, -(J^2 + e I)h^-1; h, -J*) on (X, Y), (hX, hY), (X, hY) with constant X, Y.
/// They assume nabla J = 0.
std::array<Verdict, 3> pair_nijenhuis_closed_forms(const BilinearField& h, const EndoField& J, double e,
                                                   const Connection& c, const Sampler& s, const Tolerance& tol);

/// N of the single-J product on (hX, hY) against
/// 4 h^-1((nabla_JX J*)hY - (nabla_JY J*)hX - (nabla_JX h)JY + (nabla_JY h)JX - h T(JX, JY)).
Verdict single_nijenhuis_criterion(const BilinearField& h, const EndoField& J, const Connection& c, const Sampler& s,
                                   const Tolerance& tol);

/// Tensoriality in sigma and Leibniz rule in tau with a fixed non-constant function.
Verdict connection_contract(const GenConnection& D, int n, const Sampler& s, const Tolerance& tol);

/// N(f s, t) - f N(s, t) and N(s, f t) - f N(s, t); recorded, not asserted.
Verdict nijenhuis_bilinearity(const GenOperator& J, const Connection& c, const Sampler& s, const Tolerance& tol);

} // namespace gg
