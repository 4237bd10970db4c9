#include "gengeom/spec.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "gengeom/errors.hpp"

namespace gg {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& where, const std::string& msg) {
    throw ParseError(path + ": " + where + ": " + msg);
}

const json& need(const json& obj, const char* key, const std::string& path, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) fail(path, where, std::string("missing field '") + key + "'");
    return obj.at(key);
}

// SyntaxError messages end with " at position N"; strip the kind prefix and the suffix to re-wrap.
std::string bare_message(const SyntaxError& e) {
    std::string m = e.what();
    const std::string prefix = "SyntaxError: ";
    if (m.rfind(prefix, 0) == 0) m = m.substr(prefix.size());
    const auto at = m.rfind(" at position ");
    if (at != std::string::npos) m = m.substr(0, at);
    return m;
}

class Reader {
public:
    Reader(std::string path, ManifoldSpec& spec) : path_(std::move(path)), spec_(spec) {}

    ExprPtr expr(const json& j, const std::string& where) {
        std::string text;
        if (j.is_number()) {
            std::ostringstream os;
            os.precision(17);
            os << j.get<double>();
            text = os.str();
        } else if (j.is_string()) {
            text = j.get<std::string>();
        } else {
            fail(path_, where, "expected an expression string or number");
        }
        ExprPtr e;
        try {
            e = parse(text, spec_.chart.coords);
        } catch (const SyntaxError& err) {
            throw SyntaxError(where + " '" + text + "': " + bare_message(err), err.position);
        } catch (const UnknownIdentifier& err) {
            throw UnknownIdentifier(where + " '" + text + "': " + err.what());
        }
        spec_.expressions.push_back({where, text, e});
        return e;
    }

    double constant(const json& j, const std::string& where) {
        if (j.is_number()) return j.get<double>();
        const ExprPtr e = expr(j, where);
        if (!is_constant_expr(*e)) fail(path_, where, "expected a constant");
        return eval_real(*e, {});
    }

    std::vector<std::vector<ExprPtr>> matrix(const json& j, const std::string& where) {
        const int n = spec_.dim;
        if (!j.is_array() || static_cast<int>(j.size()) != n) fail(path_, where, "expected " + std::to_string(n) + " rows");
        std::vector<std::vector<ExprPtr>> rows;
        for (int i = 0; i < n; ++i) {
            const json& row = j[static_cast<std::size_t>(i)];
            if (!row.is_array() || static_cast<int>(row.size()) != n)
                fail(path_, where, "row " + std::to_string(i) + " must have " + std::to_string(n) + " entries");
            std::vector<ExprPtr> r;
            for (int k = 0; k < n; ++k)
                r.push_back(expr(row[static_cast<std::size_t>(k)],
                                 where + "[" + std::to_string(i) + "][" + std::to_string(k) + "]"));
            rows.push_back(std::move(r));
        }
        return rows;
    }

    Connection connection(const json& j) {
        const int n = spec_.dim;
        const std::string kind = need(j, "kind", path_, "connection").get<std::string>();
        spec_.connection_kind = kind;
        if (kind == "flat") return flat_connection(n);
        if (kind == "levi_civita") {
            if (!spec_.metric) fail(path_, "connection", "levi_civita needs a metric");
            return levi_civita(*spec_.metric, n);
        }
        if (kind == "christoffel") {
            const ExprPtr zero = parse("0", {});
            std::vector<std::vector<std::vector<ExprPtr>>> table(
                static_cast<std::size_t>(n),
                std::vector<std::vector<ExprPtr>>(static_cast<std::size_t>(n),
                                                  std::vector<ExprPtr>(static_cast<std::size_t>(n), zero)));
            const json& g = need(j, "gamma", path_, "connection");
            if (!g.is_object()) fail(path_, "connection.gamma", "expected an object keyed by \"k,i,j\"");
            for (const auto& [key, val] : g.items()) {
                int k = -1, i = -1, l = -1;
                char c1 = 0, c2 = 0;
                std::istringstream is(key);
                if (!(is >> k >> c1 >> i >> c2 >> l) || c1 != ',' || c2 != ',' || k < 0 || i < 0 || l < 0 || k >= n ||
                    i >= n || l >= n)
                    fail(path_, "connection.gamma", "bad index key '" + key + "'");
                table[k][i][l] = expr(val, "connection.gamma[" + key + "]");
            }
            return christoffel_connection(n, std::move(table));
        }
        fail(path_, "connection.kind", "unknown kind '" + kind + "'");
    }

private:
    std::string path_;
    ManifoldSpec& spec_;
};

Symmetry symmetry_from(const std::string& s, const std::string& path) {
    if (s == "symmetric") return Symmetry::Symmetric;
    if (s == "skew") return Symmetry::Skew;
    if (s == "general") return Symmetry::General;
    fail(path, "metric.symmetry", "unknown symmetry '" + s + "'");
}

// Argument keys that name endomorphisms, maps or structures, per builder.
struct BuilderShape {
    std::vector<std::string> endos;
    std::vector<std::string> maps;
    std::vector<std::string> structures;
};

const std::map<std::string, BuilderShape>& builder_shapes() {
    static const std::map<std::string, BuilderShape> shapes = {
        {"single", {{"J"}, {}, {}}},
        {"pair_para", {{"J1", "J2"}, {}, {}}},
        {"diag_pair", {{"J1", "J2"}, {}, {}}},
        {"lambda", {{"J1", "J2"}, {}, {}}},
        {"on", {{"J1", "J2"}, {}, {}}},
        {"general_H", {{"J1", "J2"}, {"H1", "H2"}, {}}},
        {"reorder", {{}, {}, {"of"}}},
    };
    return shapes;
}

} // namespace

const EndoField& ManifoldSpec::endo(const std::string& n) const {
    for (const auto& [k, v] : endomorphisms)
        if (k == n) return v;
    throw UnknownReference("endomorphism '" + n + "'");
}

const CoVecMapField& ManifoldSpec::map(const std::string& n) const {
    for (const auto& [k, v] : maps)
        if (k == n) return v;
    throw UnknownReference("map '" + n + "'");
}

const BilinearField& ManifoldSpec::h() const {
    if (!metric) throw UnknownReference("metric");
    return *metric;
}

bool ManifoldSpec::has_endo(const std::string& n) const {
    for (const auto& [k, v] : endomorphisms)
        if (k == n) return true;
    return false;
}

const StructureDecl* ManifoldSpec::structure(const std::string& n) const {
    for (const auto& s : structures)
        if (s.name == n) return &s;
    return nullptr;
}

ManifoldSpec parse_spec(const json& doc, const std::string& path) {
    if (!doc.is_object()) fail(path, "document", "expected an object");
    ManifoldSpec spec;
    spec.path = path;
    spec.name = doc.value("name", std::string("unnamed"));
    spec.dim = need(doc, "dimension", path, "document").get<int>();

    const json& coords = need(doc, "coordinates", path, "document");
    if (!coords.is_array()) fail(path, "coordinates", "expected an array of names");
    spec.chart.dim = spec.dim;
    for (const auto& c : coords) spec.chart.coords.push_back(c.get<std::string>());
    const json& box = need(doc, "domain", path, "document");
    if (!box.is_array()) fail(path, "domain", "expected [[lo, hi], ...]");
    for (const auto& b : box) {
        if (!b.is_array() || b.size() != 2) fail(path, "domain", "expected [lo, hi] pairs");
        spec.chart.box.emplace_back(b[0].get<double>(), b[1].get<double>());
    }
    spec.chart.validate();

    Reader rd(path, spec);

    if (doc.contains("metric")) {
        const json& m = doc.at("metric");
        BilinearField h{matrix_field(rd.matrix(need(m, "matrix", path, "metric"), "metric"))};
        h.sym = symmetry_from(m.value("symmetry", std::string("symmetric")), path);
        spec.metric = h;
    }
    if (doc.contains("endomorphisms")) {
        for (const auto& [name, val] : doc.at("endomorphisms").items())
            spec.endomorphisms.emplace_back(name, EndoField{matrix_field(rd.matrix(val, "endomorphisms." + name))});
    }
    if (doc.contains("maps")) {
        for (const auto& [name, val] : doc.at("maps").items())
            spec.maps.emplace_back(name, CoVecMapField{matrix_field(rd.matrix(val, "maps." + name))});
    }

    spec.connection = doc.contains("connection") ? rd.connection(doc.at("connection")) : flat_connection(spec.dim);

    std::set<std::string> seen;
    if (doc.contains("structures")) {
        for (const auto& s : doc.at("structures")) {
            StructureDecl d;
            d.name = need(s, "name", path, "structures").get<std::string>();
            d.builder = need(s, "builder", path, "structures." + d.name).get<std::string>();
            d.args = s;
            const auto it = builder_shapes().find(d.builder);
            if (it == builder_shapes().end()) throw UnknownReference("builder '" + d.builder + "' in " + d.name);
            for (const auto& key : it->second.endos) {
                const std::string ref = need(s, key.c_str(), path, "structures." + d.name).get<std::string>();
                if (!spec.has_endo(ref))
                    throw UnknownReference("endomorphism '" + ref + "' in structure " + d.name);
            }
            for (const auto& key : it->second.maps) {
                const std::string ref = need(s, key.c_str(), path, "structures." + d.name).get<std::string>();
                spec.map(ref);
            }
            for (const auto& key : it->second.structures) {
                const std::string ref = need(s, key.c_str(), path, "structures." + d.name).get<std::string>();
                if (!seen.count(ref)) throw UnknownReference("structure '" + ref + "' in " + d.name);
            }
            if ((d.builder != "diag_pair" && d.builder != "reorder") && !spec.metric)
                fail(path, "structures." + d.name, "builder '" + d.builder + "' needs a metric");
            if (d.builder == "lambda") {
                const json& l = need(s, "lambda", path, "structures." + d.name);
                if (!l.is_array() || l.size() != 2) fail(path, "structures." + d.name, "lambda must be [l1, l2]");
            }
            if (d.builder == "reorder") {
                const json& o = need(s, "order", path, "structures." + d.name);
                if (!o.is_array() || o.size() != 3) fail(path, "structures." + d.name, "order must list 3 indices");
            }
            if (!seen.insert(d.name).second) fail(path, "structures", "duplicate name '" + d.name + "'");
            spec.structures.push_back(std::move(d));
        }
    }

    if (doc.contains("families")) {
        for (const auto& f : doc.at("families")) {
            FamilyDecl d;
            d.family = need(f, "family", path, "families").get<std::string>();
            d.base = need(f, "base", path, "families").get<std::string>();
            if (!seen.count(d.base)) throw UnknownReference("structure '" + d.base + "' in families");
            for (const auto& p : need(f, "params", path, "families")) {
                if (!p.is_array() || p.size() != 2) fail(path, "families.params", "expected [a, b] pairs");
                d.params.emplace_back(rd.constant(p[0], "families.params"), rd.constant(p[1], "families.params"));
            }
            spec.families.push_back(std::move(d));
        }
    }

    if (doc.contains("alpha")) {
        spec.alphas.clear();
        for (const auto& a : doc.at("alpha")) spec.alphas.push_back(a.get<double>());
    }
    if (doc.contains("checks"))
        for (const auto& c : doc.at("checks")) spec.checks.push_back(c.get<std::string>());
    if (doc.contains("sampling")) {
        const json& s = doc.at("sampling");
        spec.points = s.value("points", spec.points);
        spec.seed = s.value("seed", spec.seed);
    }
    if (doc.contains("tolerances")) {
        const json& t = doc.at("tolerances");
        spec.tol.atol = t.value("atol", spec.tol.atol);
        spec.tol.rtol = t.value("rtol", spec.tol.rtol);
    }
    if (doc.contains("expect")) {
        for (const auto& [k, v] : doc.at("expect").items()) {
            const std::string e = v.get<std::string>();
            if (e != "pass" && e != "fail") fail(path, "expect." + k, "expected \"pass\" or \"fail\"");
            spec.expect[k] = e;
        }
    }
    return spec;
}

ManifoldSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": byte " + std::to_string(e.byte) + ": " + e.what());
    }
    try {
        return parse_spec(doc, path);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

} // namespace gg
