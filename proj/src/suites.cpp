#include "gengeom/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "gengeom/canonical.hpp"
#include "gengeom/errors.hpp"
#include "gengeom/identities.hpp"

namespace gg {

using nlohmann::ordered_json;

std::string to_string(Status s) {
    switch (s) {
    case Status::Pass: return "PASS";
    case Status::Fail: return "FAIL";
    case Status::Error: return "ERROR";
    }
    return "ERROR";
}

const CheckResult* Report::find(const std::string& full_name) const {
    for (const auto& c : checks)
        if (c.full_name() == full_name) return &c;
    return nullptr;
}

int Report::exit_code() const {
    int code = 0;
    for (const auto& c : checks) {
        if (c.status == Status::Error) return 2;
        if (c.status == Status::Fail) code = 1;
    }
    return code;
}

const std::vector<std::string>& known_suites() {
    static const std::vector<std::string> s = {"base",         "connection",     "duality",     "torsion",
                                               "mm3",          "structures",     "integrability", "corollary_th",
                                               "canonical_para", "equivalence",  "obata",       "canonical_quat",
                                               "families",     "fd",             "contract"};
    return s;
}

namespace {

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }
double inf_norm(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Verdict from_bool(bool ok, double residual = 0.0, const std::string& detail = {}) {
    Verdict v;
    v.ok = ok;
    v.max_residual = residual;
    if (!ok) v.witness = Witness{-1, {}, detail};
    return v;
}

Verdict op_difference(const GenOperator& A, const GenOperator& B, const Sampler& s, const Tolerance& tol) {
    Verdict v;
    const auto& pts = s.points();
    for (std::size_t p = 0; p < pts.size(); ++p) {
        const Mat a = matrix(A, pts[p]);
        const Mat b = matrix(B, pts[p]);
        v.record(inf_norm(Mat(a - b)), inf_norm(a), tol, static_cast<int>(p), pts[p], A.name + " - " + B.name);
    }
    return v;
}

// Jet-level composition against the dense product of the numeric matrices.
Verdict product_oracle(const GenOperator& A, const GenOperator& B, const Sampler& s, const Tolerance& tol) {
    Verdict v;
    const GenOperator C = compose(A, B);
    const auto& pts = s.points();
    for (std::size_t p = 0; p < pts.size(); ++p) {
        const Mat dense = matrix(A, pts[p]) * matrix(B, pts[p]);
        v.record(inf_norm(Mat(matrix(C, pts[p]) - dense)), inf_norm(dense), tol, static_cast<int>(p), pts[p],
                 "compose vs dense product");
    }
    return v;
}

VectorField head_field(GField g, int n) {
    return [g = std::move(g), n](const JetPoint& p) {
        JVec v = g(p);
        v.resize(static_cast<std::size_t>(n));
        return v;
    };
}

// Result shared by several checks, kept separately per derivative mode so a
// finite-difference re-run recomputes instead of reusing the AD value.
template <class T>
class ModeCache {
public:
    template <class F>
    const T& get(F&& f) {
        auto& slot = derivative_mode() == DerivativeMode::Automatic ? ad_ : fd_;
        if (!slot) slot = f();
        return *slot;
    }

private:
    std::optional<T> ad_, fd_;
};

struct Built {
    std::string builder;
    Triple t;
    TripleClass cls;
    std::vector<std::pair<std::string, Verdict>> extra;
    std::string J;   // single builder: source endomorphism
};

struct Job {
    std::string suite, name;
    bool derivative = true;
    bool recorded = false;
    std::function<Verdict()> run;
};

class Runner {
public:
    Runner(const ManifoldSpec& spec, const RunOptions& opts)
        : spec_(spec),
          sampler_(spec.chart, opts.points.value_or(spec.points), opts.seed.value_or(spec.seed)),
          force_(opts.force) {
        tol_ = spec.tol;
        if (opts.tol) tol_.atol = *opts.tol;
        ctol_ = Tolerance{opts.tol ? *opts.tol : std::max(tol_.atol, 1e-7), tol_.rtol};
        n_ = spec.dim;
    }

    const Sampler& sampler() const { return sampler_; }
    std::vector<Job>& jobs() { return jobs_; }
    std::vector<std::string>& warnings() { return warnings_; }

    void register_suite(const std::string& suite) {
        if (suite == "base") base();
        else if (suite == "connection") connection();
        else if (suite == "duality") duality();
        else if (suite == "torsion") torsion();
        else if (suite == "mm3") mm3();
        else if (suite == "structures") structures();
        else if (suite == "integrability") integrability();
        else if (suite == "corollary_th") corollary_th();
        else if (suite == "canonical_para") canonical_para_suite();
        else if (suite == "equivalence") equivalence();
        else if (suite == "obata") obata_suite();
        else if (suite == "canonical_quat") canonical_quat_suite();
        else if (suite == "families") families();
        else if (suite == "fd") fd();
        else if (suite == "contract") contract();
        else throw UnknownReference("suite '" + suite + "'");
    }

private:
    const ManifoldSpec& spec_;
    Sampler sampler_;
    bool force_;
    Tolerance tol_, ctol_;
    int n_ = 0;
    std::vector<Job> jobs_;
    std::vector<std::string> warnings_;
    std::map<std::string, std::shared_ptr<Built>> cache_;

    void add(const std::string& suite, const std::string& name, bool derivative, std::function<Verdict()> f,
             bool recorded = false) {
        jobs_.push_back(Job{suite, name, derivative, recorded, std::move(f)});
    }

    void add_error(const std::string& suite, const std::string& name, const std::string& what) {
        add(suite, name, false, [what]() -> Verdict { throw PreconditionFailed(what); });
    }

    bool needs_metric(const std::string& suite) {
        if (spec_.metric) return true;
        add_error(suite, "metric", "suite needs a metric");
        return false;
    }

    // --- structures -------------------------------------------------------

    const Built& built(const std::string& name) {
        if (auto it = cache_.find(name); it != cache_.end()) return *it->second;
        const StructureDecl* d = spec_.structure(name);
        if (!d) throw UnknownReference("structure '" + name + "'");
        auto b = std::make_shared<Built>(build(*d));
        cache_[name] = b;
        return *b;
    }

    std::string arg(const StructureDecl& d, const char* key) const { return d.args.at(key).get<std::string>(); }

    Built build(const StructureDecl& d) {
        Built b;
        b.builder = d.builder;
        BuildContext ctx{sampler_, tol_, force_};
        const Sampler& s = sampler_;
        if (d.builder == "single") {
            b.J = arg(d, "J");
            b.t = build_single(spec_.h(), spec_.endo(b.J), ctx);
            b.extra.emplace_back("product_blocks",
                                 op_difference(b.t.J3, single_product_blocks(spec_.h(), spec_.endo(b.J), n_), s, tol_));
        } else if (d.builder == "pair_para") {
            b.t = build_pair_para(spec_.h(), spec_.endo(arg(d, "J1")), spec_.endo(arg(d, "J2")), ctx);
        } else if (d.builder == "diag_pair") {
            const DiagPair p = build_diag_pair(spec_.endo(arg(d, "J1")), spec_.endo(arg(d, "J2")), n_);
            b.t = Triple{p.J1, p.J2, p.product};
            b.extra.emplace_back("product_formula", op_difference(p.product, compose(p.J1, p.J2), s, tol_));
        } else if (d.builder == "lambda") {
            const double l1 = d.args.at("lambda")[0].get<double>();
            const double l2 = d.args.at("lambda")[1].get<double>();
            const LambdaResult r = build_lambda(spec_.h(), spec_.endo(arg(d, "J1")), spec_.endo(arg(d, "J2")), l1, l2, ctx);
            b.t = Triple{r.J1, r.J2, r.product};
            b.extra.emplace_back("product_formula", r.product_matches);
            b.extra.emplace_back("square_formula_1", r.square_formula[0]);
            b.extra.emplace_back("square_formula_2", r.square_formula[1]);
            for (int i = 0; i < 2; ++i) {
                const OpKind k = r.classes[static_cast<std::size_t>(i)].kind;
                const bool ok = (k == OpKind::AlmostComplex) == r.complex_by_remark[static_cast<std::size_t>(i)] &&
                                (k == OpKind::AlmostProduct) == r.product_by_remark[static_cast<std::size_t>(i)];
                b.extra.emplace_back("remark_class_" + std::to_string(i + 1),
                                     from_bool(ok, 0.0, "classification disagrees with the lambda remarks"));
            }
            const bool anti = operator_relation(r.J1, r.J2, -1.0, s, tol_).ok;
            b.extra.emplace_back("remark_anticommute", from_bool(anti == r.anticommute_by_remark, 0.0,
                                                                 "anticommutation disagrees with the lambda remark"));
        } else if (d.builder == "on") {
            const EndoField& J1 = spec_.endo(arg(d, "J1"));
            const EndoField& J2 = spec_.endo(arg(d, "J2"));
            const GenOperator on = build_on(spec_.h(), J1, J2, ctx);
            const auto f = on_factors(spec_.h(), J1, J2, n_);
            b.t = Triple{f[0], f[1], on};
            b.extra.emplace_back("product_formula", op_difference(on, compose(f[0], f[1]), s, tol_));
            if (commute_check(J1, J2, s, tol_).ok) {
                // commuting case: the square is diag(J1^2 J2^2, (J1*)^2 (J2*)^2)
                const MatrixField A = [m1 = J1.m, m2 = J2.m](const JetPoint& p) {
                    const JMat a = m1(p), c = m2(p);
                    return JMat(a * a * c * c);
                };
                const MatrixField D = [m1 = J1.m, m2 = J2.m](const JetPoint& p) {
                    const JMat a = transpose(m1(p)), c = transpose(m2(p));
                    return JMat(a * a * c * c);
                };
                const MatrixField Z = [n = n_](const JetPoint& p) { return JMat(n, n, static_cast<int>(p.size())); };
                b.extra.emplace_back("square_formula",
                                     op_difference(compose(on, on), block_operator(n_, A, Z, Z, D), s, tol_));
            }
        } else if (d.builder == "general_H") {
            const GeneralHResult r = build_general_H(spec_.h(), spec_.endo(arg(d, "J1")), spec_.endo(arg(d, "J2")),
                                                     spec_.map(arg(d, "H1")), spec_.map(arg(d, "H2")), ctx);
            b.t = Triple{r.J1, r.J2, compose(r.J1, r.J2)};
            b.extra.emplace_back("system_agrees",
                                 from_bool(r.system.ok == r.anticommute.ok, r.system.max_residual,
                                           "anticommutation and the block system disagree"));
            b.extra.emplace_back("system", r.system);
        } else if (d.builder == "reorder") {
            const Built& base = built(arg(d, "of"));
            const GenOperator ops[3] = {base.t.J1, base.t.J2, base.t.J3};
            const auto& o = d.args.at("order");
            b.t = Triple{ops[o[0].get<int>()], ops[o[1].get<int>()], ops[o[2].get<int>()]};
            b.J = base.J;
        } else {
            throw UnknownReference("builder '" + d.builder + "'");
        }
        b.cls = classify_triple(b.t.J1, b.t.J2, b.t.J3, s, tol_);
        for (auto& w : ctx.warnings) warnings_.push_back(d.name + ": " + w);
        return b;
    }

    // Registers f for each structure; build errors become a single ERROR check.
    template <class F>
    void each_structure(const std::string& suite, F&& f) {
        for (const auto& d : spec_.structures) {
            try {
                const Built& b = built(d.name);
                f(d, b);
            } catch (const std::exception& e) {
                const std::string msg = e.what();
                add(suite, d.name + ".build", false, [msg]() -> Verdict { throw PreconditionFailed(msg); });
            }
        }
    }

    // Product pair used for the canonical connection of a para-quaternionic triple.
    std::pair<GenOperator, GenOperator> para_pair(const Built& b) {
        return product_members(b.t.J1, b.t.J2, sampler_, tol_);
    }

    Verdict parallel_members(const GenConnection& D, const GenOperator& J) {
        return parallel_operator_check(D, J, sampler_, ctol_);
    }

    // --- suites -------------------------------------------------------------

    void base() {
        const std::string S = "base";
        if (spec_.metric) {
            add(S, "metric.nondegenerate", false, [this] {
                try {
                    require_nondegenerate(spec_.h(), sampler_);
                    return from_bool(true);
                } catch (const SingularMetric& e) {
                    return from_bool(false, std::abs(e.det), e.what());
                }
            });
            if (spec_.h().sym != Symmetry::General)
                add(S, "metric.symmetry", false, [this] { return symmetry_check(spec_.h(), spec_.h().sym, sampler_, tol_); });
        }
        for (const auto& [name, J] : spec_.endomorphisms) {
            const EndoField* Jp = &J;
            if (spec_.metric)
                add(S, name + ".h_symmetric", false, [this, Jp] { return h_symmetry(*Jp, spec_.h(), sampler_, tol_); });
            add(S, name + ".nijenhuis", true, [this, Jp] {
                Verdict v;
                const auto& pts = sampler_.points();
                for (std::size_t k = 0; k < pts.size(); ++k)
                    for (int i = 0; i < n_; ++i)
                        for (int j = i + 1; j < n_; ++j)
                            v.record(inf_norm(nijenhuis_J(*Jp, basis_vector(i, n_), basis_vector(j, n_), pts[k])), 0.0,
                                     tol_, static_cast<int>(k), pts[k],
                                     "N_J(d" + std::to_string(i) + ", d" + std::to_string(j) + ")");
                return v;
            });
            add(S, name + ".parallel", true, [this, Jp] {
                return parallel_check(spec_.connection, Jp->m, Space::Tangent, Space::Tangent, sampler_, tol_);
            });
        }
    }

    void connection() {
        const std::string S = "connection";
        add(S, "torsion_formula", true, [this] {
            Verdict v;
            Rng rng(sampler_.seed() ^ 0x70a5ULL);
            std::vector<VectorField> fields;
            for (int k = 0; k < 4; ++k) fields.push_back(head_field(random_section(rng, n_), n_));
            const auto& pts = sampler_.points();
            for (std::size_t p = 0; p < pts.size(); ++p)
                for (std::size_t a = 0; a < fields.size(); ++a)
                    for (std::size_t b = a + 1; b < fields.size(); ++b) {
                        const Vec X = value_at(fields[a], pts[p]), Y = value_at(fields[b], pts[p]);
                        const Vec d = gg::torsion(spec_.connection, fields[a], fields[b], pts[p]) -
                                      torsion_formula(spec_.connection, X, Y, pts[p]);
                        v.record(inf_norm(d), 0.0, tol_, static_cast<int>(p), pts[p], "T(X, Y)");
                    }
            return v;
        });
        if (!needs_metric(S)) return;
        add(S, "dual_involution", false, [this] {
            const Connection d = dual_connection(spec_.connection, spec_.h(), &sampler_, tol_);
            const Connection dd = dual_connection(d, spec_.h());
            const double r = christoffel_distance(dd, spec_.connection, sampler_);
            return from_bool(tol_.accepts(r), r, "(nabla*)* differs from nabla");
        });
        add(S, "duality", true, [this] {
            const Connection d = dual_connection(spec_.connection, spec_.h(), &sampler_, tol_);
            Verdict v;
            const auto& pts = sampler_.points();
            for (std::size_t p = 0; p < pts.size(); ++p) {
                const Point& x = pts[p];
                const MatJacobian dh = differentiate(spec_.h().m, x);
                const Christoffel g = spec_.connection.gamma(x), gs = d.gamma(x);
                for (int i = 0; i < n_; ++i) {
                    const Mat r = dh.d[static_cast<std::size_t>(i)] - (g.G[static_cast<std::size_t>(i)].transpose() * dh.value +
                                                                      dh.value * gs.G[static_cast<std::size_t>(i)]);
                    v.record(inf_norm(r), inf_norm(dh.d[static_cast<std::size_t>(i)]), tol_, static_cast<int>(p), x,
                             "d" + std::to_string(i) + " h(e_j, e_k)");
                }
            }
            return v;
        });
        add(S, "quasi_statistical", true,
            [this] { return quasi_statistical_check(spec_.connection, spec_.h(), sampler_, tol_); });
    }

    void duality() {
        const std::string S = "duality";
        if (!needs_metric(S)) return;
        add(S, "hat", true, [this] {
            const GenConnection D = hat_connection(spec_.connection, spec_.h());
            const GenConnection Ds = hat_dual(spec_.connection, spec_.h(), &sampler_, tol_);
            return duality_check(D, Ds, spec_.h(), n_, sampler_, tol_);
        });
    }

    void torsion() {
        const std::string S = "torsion";
        if (!needs_metric(S)) return;
        const Connection& c = spec_.connection;
        add(S, "hat_closed_form", true, [this, &c] {
            const GenConnection D = hat_connection(c, spec_.h());
            return frame_check(sampler_, n_, tol_, [&](const GField& a, const GField& b, const Point& x) {
                return Vec(gen_torsion(D, c, a, b, x) -
                           hat_torsion_formula(c, spec_.h(), value_at(a, x), value_at(b, x), x));
            }, "T^hat - closed form");
        });
        add(S, "dual_closed_form", true, [this, &c] {
            const GenConnection D = hat_dual(c, spec_.h(), &sampler_, tol_);
            return frame_check(sampler_, n_, tol_, [&](const GField& a, const GField& b, const Point& x) {
                return Vec(gen_torsion(D, c, a, b, x) -
                           hat_dual_torsion_formula(c, spec_.h(), value_at(a, x), value_at(b, x), x));
            }, "T^dual - closed form");
        });
        add(S, "dual_torsion_free", true, [this, &c] {
            const GenConnection D = hat_dual(c, spec_.h(), &sampler_, tol_);
            return frame_check(sampler_, n_, tol_, [&](const GField& a, const GField& b, const Point& x) {
                return gen_torsion(D, c, a, b, x);
            }, "T^dual");
        });
        add(S, "quasi_statistical", true, [this, &c] { return quasi_statistical_check(c, spec_.h(), sampler_, tol_); });
        add(S, "equivalence", true, [this, &c] {
            const GenConnection D = hat_dual(c, spec_.h(), &sampler_, tol_);
            const Verdict t = frame_check(sampler_, n_, tol_, [&](const GField& a, const GField& b, const Point& x) {
                return gen_torsion(D, c, a, b, x);
            }, "T^dual");
            const Verdict q = quasi_statistical_check(c, spec_.h(), sampler_, tol_);
            return from_bool(t.ok == q.ok, 0.0,
                             std::string("torsion-free=") + (t.ok ? "true" : "false") +
                                 " quasi-statistical=" + (q.ok ? "true" : "false"));
        });
    }

    void mm3() {
        const std::string S = "mm3";
        if (!needs_metric(S)) return;
        const Connection& c = spec_.connection;
        for (const auto& d : spec_.structures) {
            if (d.builder != "single") continue;
            const std::string J = arg(d, "J");
            const std::string nm = d.name;
            add(S, nm + ".nabla_J", true, [this, J] {
                return parallel_check(spec_.connection, spec_.endo(J).m, Space::Tangent, Space::Tangent, sampler_, tol_);
            });
            auto cov = [this, nm, &c](std::function<GenConnection()> make) {
                return [this, nm, &c, make] {
                    const GenConnection D = make();
                    const GenOperator P = built(nm).t.J3;
                    return frame_check(sampler_, n_, tol_, [&](const GField& a, const GField& b, const Point& x) {
                        return cov_operator(D, P, a, b, x);
                    }, "(D J^)");
                };
            };
            add(S, nm + ".hat", true, cov([this, &c] { return hat_connection(c, spec_.h()); }));
            add(S, nm + ".dual", true, cov([this, &c] { return hat_dual(c, spec_.h(), &sampler_, tol_); }));
            for (double a : spec_.alphas)
                add(S, nm + fmt::format(".alpha={:g}", a), true, cov([this, &c, a] {
                        return alpha_connection(hat_connection(c, spec_.h()), hat_dual(c, spec_.h()), a);
                    }));
            add(S, nm + ".hat_formula", true, [this, J, &c] {
                return single_cov_formulas(spec_.h(), spec_.endo(J), c, sampler_, tol_)[0];
            });
            add(S, nm + ".dual_formula", true, [this, J, &c] {
                return single_cov_formulas(spec_.h(), spec_.endo(J), c, sampler_, tol_)[1];
            });
        }
    }

    void structures() {
        const std::string S = "structures";
        each_structure(S, [&](const StructureDecl& d, const Built& b) {
            const std::string nm = d.name;
            const Built* bp = &b;
            add(S, nm + ".classify", false, [bp, d] {
                const std::string got = to_string(bp->cls.kind);
                if (!d.args.contains("kind")) return from_bool(true);
                const std::string want = d.args.at("kind").get<std::string>();
                return from_bool(got == want, 0.0, "classified " + got + ", expected " + want);
            });
            add(S, nm + ".product", false, [bp] { return bp->cls.product; });
            if (bp->cls.anticommuting) add(S, nm + ".remark", false, [bp] { return bp->cls.remark; });
            add(S, nm + ".product_oracle", false,
                [this, bp] { return product_oracle(bp->t.J1, bp->t.J2, sampler_, tol_); });
            for (std::size_t i = 0; i < b.extra.size(); ++i)
                add(S, nm + "." + b.extra[i].first, false, [bp, i] { return bp->extra[i].second; });
            if (d.builder == "single") {
                const std::string J = b.J;
                add(S, nm + ".nijenhuis_criterion", true, [this, J] {
                    return single_nijenhuis_criterion(spec_.h(), spec_.endo(J), spec_.connection, sampler_, ctol_);
                });
                if (d.args.value("closed_forms", false)) {
                    for (int e : {1, -1}) {
                        const std::string tag = e > 0 ? "minus" : "plus";
                        const char* parts[3] = {"XY", "hXhY", "XhY"};
                        for (int k = 0; k < 3; ++k)
                            add(S, nm + ".closed_form_" + tag + "_" + parts[k], true, [this, J, e, k] {
                                return pair_nijenhuis_closed_forms(spec_.h(), spec_.endo(J), e, spec_.connection,
                                                                   sampler_, ctol_)[static_cast<std::size_t>(k)];
                            });
                    }
                }
            }
            if (d.args.contains("parallel") && spec_.metric) {
                for (const auto& m : d.args.at("parallel")) {
                    const std::string member = m.get<std::string>();
                    const GenOperator* op = member == "J1" ? &bp->t.J1 : member == "J2" ? &bp->t.J2 : &bp->t.J3;
                    add(S, nm + ".hat_parallel_" + member, true, [this, op] {
                        return parallel_operator_check(hat_connection(spec_.connection, spec_.h()), *op, sampler_, tol_);
                    });
                    add(S, nm + ".dual_parallel_" + member, true, [this, op] {
                        return parallel_operator_check(hat_dual(spec_.connection, spec_.h()), *op, sampler_, tol_);
                    });
                }
            }
        });
    }

    void integrability() {
        const std::string S = "integrability";
        const Connection& c = spec_.connection;
        each_structure(S, [&](const StructureDecl& d, const Built& b) {
            const Built* bp = &b;
            const std::string nm = d.name;
            add(S, nm + ".N1", true, [this, bp, &c] { return integrability_check(bp->t.J1, c, sampler_, ctol_); });
            add(S, nm + ".N2", true, [this, bp, &c] { return integrability_check(bp->t.J2, c, sampler_, ctol_); });
            add(S, nm + ".N3", true, [this, bp, &c] { return integrability_check(bp->t.J3, c, sampler_, ctol_); });
            if (b.cls.kind == TripleKind::Quaternionic && b.cls.product_sign != 0)
                add(S, nm + ".propagation", true,
                    [this, bp, &c] { return propagation_quaternionic(bp->t, c, sampler_, ctol_); });
            if (b.cls.kind == TripleKind::ParaQuaternionic && b.cls.squares[0] == OpKind::AlmostComplex &&
                b.cls.product_sign != 0) {
                add(S, nm + ".propagation_N3", true,
                    [this, bp, &c] { return propagation_para(bp->t, c, sampler_, ctol_)[0]; });
                add(S, nm + ".propagation_N1", true,
                    [this, bp, &c] { return propagation_para(bp->t, c, sampler_, ctol_)[1]; });
            }
        });
    }

    void corollary_th() {
        const std::string S = "corollary_th";
        if (!needs_metric(S)) return;
        const Connection& c = spec_.connection;
        each_structure(S, [&](const StructureDecl& d, const Built& b) {
            if (d.builder != "single") return;
            const Built* bp = &b;
            const std::string nm = d.name;
            add(S, nm + ".dual_torsion_free", true, [this, &c] {
                const GenConnection D = hat_dual(c, spec_.h(), &sampler_, tol_);
                return frame_check(sampler_, n_, tol_, [&](const GField& a, const GField& b2, const Point& x) {
                    return gen_torsion(D, c, a, b2, x);
                }, "T^dual");
            });
            const char* names[3] = {"J_minus", "J_plus", "J"};
            for (int k = 0; k < 3; ++k) {
                const GenOperator* op = k == 0 ? &bp->t.J1 : k == 1 ? &bp->t.J2 : &bp->t.J3;
                add(S, nm + ".dual_parallel_" + names[k], true, [this, op, &c] {
                    return parallel_operator_check(hat_dual(c, spec_.h()), *op, sampler_, tol_);
                });
                add(S, nm + ".integrable_" + names[k], true,
                    [this, op, &c] { return integrability_check(*op, c, sampler_, ctol_); });
            }
            // (J+, J, J-): the canonical connection of the two product members
            add(S, nm + ".canonical_equals_dual", true, [this, bp, &c] {
                const GenConnection D = canonical_para(bp->t.J2, bp->t.J3, c, &sampler_, tol_);
                return connection_difference(D, hat_dual(c, spec_.h()), n_, sampler_, ctol_);
            });
        });
    }

    void canonical_para_suite() {
        const std::string S = "canonical_para";
        const Connection& c = spec_.connection;
        each_structure(S, [&](const StructureDecl& d, const Built& b) {
            if (b.cls.kind != TripleKind::ParaQuaternionic) return;
            const auto pq = std::make_shared<std::pair<GenOperator, GenOperator>>(para_pair(b));
            const auto D = std::make_shared<GenConnection>(canonical_para(pq->first, pq->second, c, &sampler_, tol_));
            const std::string nm = d.name;
            add(S, nm + ".DJ1", true, [this, pq, D] { return parallel_members(*D, pq->first); });
            add(S, nm + ".DJ2", true, [this, pq, D] { return parallel_members(*D, pq->second); });
            add(S, nm + ".DJ1J2", true,
                [this, pq, D] { return parallel_members(*D, compose(pq->first, pq->second)); });
            add(S, nm + ".mixed_torsion", true,
                [this, pq, D, &c] { return mixed_torsion_check(*D, pq->first, c, sampler_, ctol_); });
            add(S, nm + ".subspaces", true,
                [this, pq, D] { return subspace_check(*D, pq->first, pq->second, sampler_, ctol_); });
            const char* lemma[3] = {"fn_V1", "fn_V2", "fn_V1V2"};
            const auto rel = std::make_shared<ModeCache<std::array<Verdict, 3>>>();
            for (int k = 0; k < 3; ++k)
                add(S, nm + "." + lemma[k], true, [this, pq, D, &c, k, rel] {
                    return rel->get([&] {
                        return fn_torsion_relations(pq->first, pq->second, *D, c, sampler_, ctol_);
                    })[static_cast<std::size_t>(k)];
                });
            add(S, nm + ".torsion_free", true, [this, D, &c] {
                return frame_check(sampler_, n_, ctol_, [&](const GField& a, const GField& b2, const Point& x) {
                    return gen_torsion(*D, c, a, b2, x);
                }, "T^D");
            });
        });
    }

    void equivalence() {
        const std::string S = "equivalence";
        const Connection& c = spec_.connection;
        each_structure(S, [&](const StructureDecl& d, const Built& b) {
            if (b.cls.kind != TripleKind::ParaQuaternionic) return;
            const auto pq = std::make_shared<std::pair<GenOperator, GenOperator>>(para_pair(b));
            const auto rep = std::make_shared<ModeCache<EquivalenceReport>>();
            auto get = [this, pq, rep, &c]() -> const EquivalenceReport& {
                return rep->get([&] { return equivalence_suite(pq->first, pq->second, c, sampler_, ctol_); });
            };
            const std::string nm = d.name;
            add(S, nm + ".fn_bracket", true, [get] { return get().fn_bracket; }, true);
            add(S, nm + ".torsion", true, [get] { return get().torsion; }, true);
            add(S, nm + ".nijenhuis", true, [get] { return get().nijenhuis; }, true);
            add(S, nm + ".agree", true, [get] {
                const auto& r = get();
                return from_bool(r.agree(), 0.0,
                                 fmt::format("fn_zero={} torsion_free={} integrable={}", r.fn_zero, r.torsion_free,
                                             r.integrable));
            });
        });
    }

    void obata_suite() {
        const std::string S = "obata";
        const Connection& c = spec_.connection;
        each_structure(S, [&](const StructureDecl& d, const Built& b) {
            if (b.cls.kind != TripleKind::Quaternionic) return;
            const Built* bp = &b;
            const auto D = std::make_shared<GenConnection>(obata(b.t.J1, b.t.J2, b.t.J3, c, &sampler_, tol_));
            const std::string nm = d.name;
            add(S, nm + ".DJ1", true, [this, bp, D] { return parallel_members(*D, bp->t.J1); });
            add(S, nm + ".DJ2", true, [this, bp, D] { return parallel_members(*D, bp->t.J2); });
            add(S, nm + ".DJ3", true, [this, bp, D] { return parallel_members(*D, bp->t.J3); });
            add(S, nm + ".torsion_identity", true,
                [this, bp, D, &c] { return obata_torsion_identity(bp->t, *D, c, sampler_, ctol_, 16); });
            add(S, nm + ".torsion_free", true, [this, D, &c] {
                return frame_check(sampler_, n_, Tolerance{1e-9, 0.0},
                                   [&](const GField& a, const GField& b2, const Point& x) {
                                       return gen_torsion(*D, c, a, b2, x);
                                   }, "T^D");
            });
        });
    }

    void canonical_quat_suite() {
        const std::string S = "canonical_quat";
        const Connection& c = spec_.connection;
        each_structure(S, [&](const StructureDecl& d, const Built& b) {
            if (b.cls.kind != TripleKind::Quaternionic) return;
            const Built* bp = &b;
            const auto D = std::make_shared<GenConnection>(canonical_quat(b.t.J1, b.t.J2, c, &sampler_, tol_));
            const std::string nm = d.name;
            add(S, nm + ".imaginary", true, [this, bp, &c] {
                const double r = canonical_quat_imaginary(bp->t.J1, bp->t.J2, c, sampler_);
                return from_bool(r <= 1e-9, r, "imaginary part on real frame sections");
            });
            add(S, nm + ".DJ1", true, [this, bp, D] { return parallel_members(*D, bp->t.J1); });
            add(S, nm + ".DJ2", true, [this, bp, D] { return parallel_members(*D, bp->t.J2); });
            add(S, nm + ".mixed_torsion", true,
                [this, bp, &c] { return mixed_torsion_check_complex(bp->t.J1, bp->t.J2, c, sampler_, ctol_); });
            add(S, nm + ".equals_obata", true, [this, bp, D, &c] {
                return connection_difference(*D, obata(bp->t.J1, bp->t.J2, bp->t.J3, c), n_, sampler_, ctol_);
            });
        });
    }

    void families() {
        const std::string S = "families";
        const Connection& c = spec_.connection;
        for (std::size_t fi = 0; fi < spec_.families.size(); ++fi) {
            const FamilyDecl* fd = &spec_.families[fi];
            const std::string base = fd->family + "@" + fd->base;
            const auto res = std::make_shared<ModeCache<std::vector<FamilyResult>>>();
            auto get = [this, fd, res, &c]() -> const std::vector<FamilyResult>& {
                return res->get([&] {
                    return family_invariance(family_from_string(fd->family), built(fd->base).t, c, fd->params,
                                             sampler_, ctol_);
                });
            };
            for (std::size_t k = 0; k < fd->params.size(); ++k) {
                const auto [a, b] = fd->params[k];
                const std::string nm = base + fmt::format("[a={:.6g},b={:.6g}]", a, b);
                add(S, nm + ".classification", false, [get, k] {
                    const FamilyResult& r = get()[k];
                    return from_bool(r.expected == r.actual, 0.0,
                                     "expected " + to_string(r.expected) + ", got " + to_string(r.actual));
                });
                add(S, nm + ".square", false, [get, k] { return get()[k].square; });
                add(S, nm + ".invariance", true, [get, k] { return get()[k].agreement; });
            }
        }
    }

    void fd() {
        const std::string S = "fd";
        add(S, "expressions", false, [this] {
            Verdict v;
            const Tolerance rel{1e-4, 0.0};
            const auto& pts = sampler_.points();
            for (const auto& se : spec_.expressions)
                for (std::size_t p = 0; p < pts.size(); ++p) {
                    const Point& x = pts[p];
                    const Jet j = eval(*se.expr, std::span<const Jet>(seed(x)));
                    const std::vector<double> g =
                        fd_gradient([&](std::span<const double> y) { return eval_real(*se.expr, y); }, x);
                    double err = 0.0, mag = 0.0;
                    for (int i = 0; i < n_; ++i) {
                        err = std::max(err, std::abs(j.d[static_cast<std::size_t>(i)] - g[static_cast<std::size_t>(i)]));
                        mag = std::max(mag, std::abs(j.d[static_cast<std::size_t>(i)]));
                    }
                    v.record(err / std::max(1.0, mag), 0.0, rel, static_cast<int>(p), x, se.where + " '" + se.text + "'");
                }
            return v;
        });
        if (spec_.metric)
            add(S, "metric_jacobian", false, [this] {
                Verdict v;
                const Tolerance rel{1e-4, 0.0};
                const auto& pts = sampler_.points();
                for (std::size_t p = 0; p < pts.size(); ++p) {
                    const MatJacobian ad = differentiate(spec_.h().m, pts[p]);
                    MatJacobian fdj;
                    {
                        ScopedDerivativeMode m(DerivativeMode::FiniteDifference);
                        fdj = differentiate(spec_.h().m, pts[p]);
                    }
                    for (int i = 0; i < n_; ++i) {
                        const Mat& a = ad.d[static_cast<std::size_t>(i)];
                        v.record(inf_norm(Mat(a - fdj.d[static_cast<std::size_t>(i)])) / std::max(1.0, inf_norm(a)),
                                 0.0, rel, static_cast<int>(p), pts[p], "d" + std::to_string(i) + " h");
                    }
                }
                return v;
            });
    }

    void contract() {
        const std::string S = "contract";
        const Connection& c = spec_.connection;
        if (spec_.metric) {
            add(S, "hat", true, [this, &c] { return connection_contract(hat_connection(c, spec_.h()), n_, sampler_, ctol_); });
            add(S, "dual", true, [this, &c] { return connection_contract(hat_dual(c, spec_.h()), n_, sampler_, ctol_); });
            add(S, "alpha=0.5", true, [this, &c] {
                return connection_contract(alpha_connection(hat_connection(c, spec_.h()), hat_dual(c, spec_.h()), 0.5), n_,
                                           sampler_, ctol_);
            });
        }
        each_structure(S, [&](const StructureDecl& d, const Built& b) {
            const Built* bp = &b;
            const std::string nm = d.name;
            add(S, nm + ".nijenhuis_bilinearity", true,
                [this, bp, &c] { return nijenhuis_bilinearity(bp->t.J3, c, sampler_, ctol_); }, true);
            if (b.cls.kind == TripleKind::ParaQuaternionic) {
                add(S, nm + ".canonical_para", true, [this, bp, &c] {
                    const auto pq = para_pair(*bp);
                    return connection_contract(canonical_para(pq.first, pq.second, c), n_, sampler_, ctol_);
                });
            }
            if (b.cls.kind == TripleKind::Quaternionic) {
                add(S, nm + ".obata", true, [this, bp, &c] {
                    return connection_contract(obata(bp->t.J1, bp->t.J2, bp->t.J3, c), n_, sampler_, ctol_);
                });
                add(S, nm + ".canonical_quat", true, [this, bp, &c] {
                    return connection_contract(canonical_quat(bp->t.J1, bp->t.J2, c), n_, sampler_, ctol_);
                });
            }
        });
    }
};

CheckResult evaluate(const Job& job, const ManifoldSpec& spec) {
    CheckResult r;
    r.suite = job.suite;
    r.name = job.name;
    r.recorded = job.recorded;
    try {
        const Verdict v = job.run();
        r.max_residual = v.max_residual;
        const auto it = spec.expect.find(r.full_name());
        const bool expect_fail = it != spec.expect.end() && it->second == "fail";
        if (expect_fail) r.expected = "fail";
        if (!v.ok) r.witness = v.witness;
        if (job.recorded) r.status = Status::Pass;
        else r.status = (v.ok != expect_fail) ? Status::Pass : Status::Fail;
    } catch (const std::exception& e) {
        r.status = Status::Error;
        r.message = e.what();
    }
    return r;
}

} // namespace

Report run_checks(const ManifoldSpec& spec, const RunOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    Runner runner(spec, opts);
    Report rep;
    rep.spec = spec.name;
    rep.seed = runner.sampler().seed();
    rep.points = static_cast<int>(runner.sampler().points().size());

    std::vector<std::string> suites;
    const bool all = opts.suites.empty() ||
                     std::find(opts.suites.begin(), opts.suites.end(), "all") != opts.suites.end();
    suites = all ? spec.checks : opts.suites;
    for (const auto& s : suites) {
        try {
            runner.register_suite(s);
        } catch (const std::exception& e) {
            CheckResult r;
            r.suite = s;
            r.name = "suite";
            r.status = Status::Error;
            r.message = e.what();
            rep.checks.push_back(r);
        }
    }

    auto& jobs = runner.jobs();
    std::vector<double> ad_residuals;
    for (const auto& job : jobs) rep.checks.push_back(evaluate(job, spec));

    if (opts.fd) {
        // Re-run a tenth of the derivative-bearing checks with central differences.
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < jobs.size(); ++i)
            if (jobs[i].derivative && rep.checks[i + (rep.checks.size() - jobs.size())].status != Status::Error)
                idx.push_back(i);
        Rng rng(rep.seed ^ 0xfdfdULL);
        for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.index(static_cast<int>(i)))]);
        const std::size_t take = idx.empty() ? 0 : std::max<std::size_t>(1, (idx.size() + 9) / 10);
        idx.resize(take);
        std::sort(idx.begin(), idx.end());
        const std::size_t offset = rep.checks.size() - jobs.size();
        for (std::size_t i : idx) {
            const CheckResult& ad = rep.checks[offset + i];
            CheckResult r;
            r.suite = "fd";
            r.name = ad.full_name();
            try {
                Verdict v;
                {
                    ScopedDerivativeMode m(DerivativeMode::FiniteDifference);
                    v = jobs[i].run();
                }
                r.max_residual = std::abs(v.max_residual - ad.max_residual);
                r.status = r.max_residual <= 1e-4 * std::max(1.0, ad.max_residual) ? Status::Pass : Status::Fail;
            } catch (const std::exception& e) {
                r.status = Status::Error;
                r.message = e.what();
            }
            rep.checks.push_back(r);
        }
    }

    rep.warnings = runner.warnings();
    rep.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

void emit_report(const Report& r, Format f, std::ostream& out) {
    if (f == Format::Text) {
        for (const auto& c : r.checks) {
            out << fmt::format("{} {} max_residual={:g}", to_string(c.status), c.full_name(), c.max_residual);
            if (!c.expected.empty()) out << "  expected=" << c.expected;
            if (c.recorded) out << "  recorded";
            if (c.status == Status::Fail && c.witness) {
                out << "  witness=[";
                for (std::size_t i = 0; i < c.witness->x.size(); ++i)
                    out << (i ? ", " : "") << fmt::format("{:g}", c.witness->x[i]);
                out << "] " << c.witness->detail;
            }
            if (c.status == Status::Error) out << "  error=" << c.message;
            out << '\n';
        }
        for (const auto& w : r.warnings) out << "WARNING " << w << '\n';
        return;
    }
    ordered_json j;
    j["spec"] = r.spec;
    j["seed"] = r.seed;
    j["points"] = r.points;
    ordered_json checks = ordered_json::array();
    for (const auto& c : r.checks) {
        ordered_json e;
        e["name"] = c.full_name();
        std::string verdict = to_string(c.status);
        std::transform(verdict.begin(), verdict.end(), verdict.begin(), ::tolower);
        e["verdict"] = verdict;
        e["max_residual"] = c.max_residual;
        if (c.witness) {
            ordered_json w;
            w["point_index"] = c.witness->point_index;
            w["x"] = c.witness->x;
            w["detail"] = c.witness->detail;
            e["witness"] = w;
        }
        if (!c.expected.empty()) e["expected"] = c.expected;
        if (c.recorded) e["recorded"] = true;
        if (!c.message.empty()) e["error"] = c.message;
        checks.push_back(e);
    }
    j["checks"] = checks;
    if (!r.warnings.empty()) j["warnings"] = r.warnings;
    j["wall_time_ms"] = r.wall_time_ms;
    out << j.dump(2) << '\n';
}

} // namespace gg
