#include "flatstruct/catalog.hpp"

#include <json.hpp>

#include <chrono>
#include <future>
#include <map>

#include "flatstruct/isomono.hpp"
#include "flatstruct/logvf.hpp"
#include "flatstruct/midconv.hpp"

namespace flatstruct {

namespace detail {
const std::vector<std::pair<std::string_view, std::string_view>>& embedded_catalog();
}

using nlohmann::json;

namespace {

cd complex_from(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2) throw SchemaError("complex numbers are [re, im] pairs");
    return {j[0].get<double>(), j[1].get<double>()};
}

json complex_to(cd v) { return json::array({v.real(), v.imag()}); }

std::vector<cd> point_from(const json& j) {
    std::vector<cd> out;
    for (const auto& x : j) out.push_back(complex_from(x));
    return out;
}

const json& require(const json& j, const char* key) {
    if (!j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
    return j.at(key);
}

CatalogPath path_from(const json& j) {
    CatalogPath p;
    p.start = point_from(require(j, "start"));
    p.end = point_from(require(j, "end"));
    if (p.start.size() != 2 || p.end.size() != 2) throw SchemaError("path endpoints are (t1, t2)");
    p.count = j.value("count", 20);
    if (p.count < 5) throw SchemaError("a path needs at least 5 points");
    if (j.contains("z_seed")) p.z_seed = complex_from(j["z_seed"]);
    if (j.contains("entry")) {
        const auto& e = j["entry"];
        if (!e.is_array() || e.size() != 2) throw SchemaError("entry is [i, j]");
        p.entry = {e[0].get<int>() - 1, e[1].get<int>() - 1};
    }
    return p;
}

json path_to(const CatalogPath& p) {
    json j;
    j["start"] = json::array({complex_to(p.start[0]), complex_to(p.start[1])});
    j["end"] = json::array({complex_to(p.end[0]), complex_to(p.end[1])});
    j["count"] = p.count;
    j["entry"] = json::array({p.entry.first + 1, p.entry.second + 1});
    if (p.z_seed != cd(0)) j["z_seed"] = complex_to(p.z_seed);
    return j;
}

std::map<std::string, std::string> load_embedded() {
    std::map<std::string, std::string> out;
    for (auto [name, text] : detail::embedded_catalog()) out.emplace(name, text);
    return out;
}

const std::map<std::string, std::string>& files() {
    static const auto f = load_embedded();
    return f;
}

}  // namespace

std::vector<std::vector<cd>> CatalogPath::points() const {
    std::vector<std::vector<cd>> out;
    for (int k = 0; k < count; ++k) {
        double s = double(k) / (count - 1);
        out.push_back({start[0] + s * (end[0] - start[0]), start[1] + s * (end[1] - start[1])});
    }
    return out;
}

std::vector<std::vector<cd>> CatalogPath::full_points() const {
    auto out = points();
    for (auto& p : out) p.push_back(0);
    return out;
}

P6Path CatalogPath::p6_path() const {
    P6Path p;
    p.points = points();
    p.z_seed = z_seed;
    return p;
}

PotentialVF CatalogEntry::build() const {
    if (!pvf.g.empty()) return pvf_from_document(pvf);
    if (!prepotential) throw SchemaError(id + ": neither g nor a prepotential is given");
    RingPtr r = build_ring(pvf.weights, pvf.extension);
    return pvf_from_prepotential(id, parse_expr(*prepotential, r));
}

CatalogEntry catalog_entry_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("catalog entry is not JSON: ") + e.what());
    }
    CatalogEntry e;
    e.id = require(j, "id").get<std::string>();
    json pj = require(j, "pvf");
    if (j.contains("prepotential")) e.prepotential = j["prepotential"].get<std::string>();
    if (pj.contains("g")) {
        e.pvf = pvf_document_from_json(pj.dump());
    } else {
        e.pvf.name = pj.value("name", e.id);
        e.pvf.weights = require(pj, "weights").get<std::vector<std::string>>();
        if (pj.contains("extension")) {
            const auto& x = pj["extension"];
            e.pvf.extension = ExtensionDoc{x.value("gen", "z"), require(x, "weight").get<std::string>(),
                                           require(x, "relation").get<std::string>()};
        }
        PotentialVF derived = e.build();
        for (const auto& g : derived.g) e.pvf.g.push_back(serialize_expr(g));
        e.pvf.meta["g_source"] = "prepotential";
    }
    if (j.contains("flags")) {
        e.flags.has_prepotential = j["flags"].value("has_prepotential", false);
        e.flags.has_extension = j["flags"].value("has_extension", false);
    }
    if (e.flags.has_extension != e.pvf.extension.has_value())
        throw SchemaError(e.id + ": has_extension flag disagrees with the document");
    e.default_path = path_from(require(j, "default_path"));
    e.notes = j.value("notes", "");
    return e;
}

std::string catalog_entry_to_json(const CatalogEntry& e) {
    json j;
    j["id"] = e.id;
    j["pvf"] = json::parse(pvf_document_to_json(e.pvf));
    if (e.prepotential) j["prepotential"] = *e.prepotential;
    j["flags"] = {{"has_prepotential", e.flags.has_prepotential}, {"has_extension", e.flags.has_extension}};
    j["default_path"] = path_to(e.default_path);
    j["notes"] = e.notes;
    return j.dump(2);
}

CatalogPath path_from_json(const std::string& text) {
    try {
        return path_from(json::parse(text));
    } catch (const json::exception& e) {
        throw SchemaError(std::string("bad path document: ") + e.what());
    }
}

std::string path_to_json(const CatalogPath& p) { return path_to(p).dump(2); }

std::vector<std::string> catalog_ids() {
    auto it = files().find("index.json");
    if (it == files().end()) throw SchemaError("catalog index is missing");
    return json::parse(it->second).at("entries").get<std::vector<std::string>>();
}

CatalogEntry catalog_get(const std::string& id) {
    auto it = files().find(id + ".json");
    if (it == files().end()) throw UnknownId("no catalog entry '" + id + "'");
    return catalog_entry_from_json(it->second);
}

VerifyDepth parse_depth(const std::string& s) {
    if (s == "symbolic") return VerifyDepth::Symbolic;
    if (s == "numeric") return VerifyDepth::Numeric;
    if (s == "full") return VerifyDepth::Full;
    throw SchemaError("depth must be symbolic, numeric or full");
}

std::string to_string(VerifyDepth d) {
    switch (d) {
        case VerifyDepth::Symbolic: return "symbolic";
        case VerifyDepth::Numeric: return "numeric";
        case VerifyDepth::Full: return "full";
    }
    return "?";
}

bool VerifyReport::passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

std::string VerifyReport::to_json() const {
    json j;
    j["id"] = id;
    j["depth"] = to_string(depth);
    j["passed"] = passed();
    j["tolerances"] = {{"residual", tol.residual}, {"identity", tol.identity}, {"trace", tol.trace}};
    json cs = json::array();
    for (const auto& c : checks) {
        json x = {{"name", c.name}, {"passed", c.passed}};
        if (c.value) x["value"] = *c.value;
        if (c.tolerance) x["tolerance"] = *c.tolerance;
        if (!c.detail.empty()) x["detail"] = c.detail;
        cs.push_back(x);
    }
    j["checks"] = cs;
    return j.dump(2);
}

namespace {

void add(VerifyReport& rep, std::string name, bool ok, std::string detail = "") {
    rep.checks.push_back({std::move(name), ok, std::nullopt, std::nullopt, std::move(detail)});
}

void add_value(VerifyReport& rep, std::string name, double value, double tol) {
    rep.checks.push_back({std::move(name), value < tol, value, tol, ""});
}

// Runs one stage; an exception becomes a failed check instead of aborting the report.
template <class F>
void stage(VerifyReport& rep, const std::string& name, F&& f) {
    try {
        f();
    } catch (const Error& e) {
        add(rep, name, false, e.what());
    }
}

}  // namespace

VerifyReport verify_entry(const CatalogEntry& e, VerifyDepth depth, const Tolerances& tol) {
    auto t0 = std::chrono::steady_clock::now();
    VerifyReport rep;
    rep.id = e.id;
    rep.depth = depth;
    rep.tol = tol;

    PotentialVF pvf = e.build();
    SaitoMatrices m = build_saito_matrices(pvf);

    stage(rep, "wdvv", [&] {
        auto w = check_extended_wdvv(pvf);
        add(rep, "wdvv.commutators", w.commutators_vanish());
        add(rep, "wdvv.unit", w.unit_ok);
        add(rep, "wdvv.homogeneity", w.homogeneity_ok);
        add(rep, "wdvv.flat_normalization", w.flat_normalization_ok);
    });
    stage(rep, "saito_relations", [&] { add(rep, "saito_relations", check_saito_relations(m)); });
    stage(rep, "logvf", [&] {
        auto l = logvf_identities(m);
        add(rep, "logvf.euler_row", l.euler_row);
        add(rep, "logvf.euler_scaling", l.euler_scaling);
        add(rep, "logvf.s1_relation", l.s1_relation);
        add(rep, "logvf.weight_duality", l.weight_duality);
        add(rep, "logvf.trace_relation", l.trace_relation);
        auto d = discriminant(m);
        add(rep, "logvf.discriminant_homogeneous", is_homogeneous(d.h, Rational(m.n())));
        auto c = saito_criterion(scaled(m.T, Rational(-1)), d);
        add(rep, "logvf.saito_criterion", c && *c == 1, c ? "c = " + to_string(*c) : "det(-T) is not c h");
    });
    if (e.prepotential) {
        stage(rep, "prepotential", [&] {
            auto fr = frobenius_check(pvf);
            bool ok = false;
            if (fr) ok = fr->F.equals(parse_expr(*e.prepotential, pvf.ring));
            add(rep, "prepotential.reconstruction", ok, fr ? "F = " + serialize_expr(fr->F) : "no pairing");
        });
    }
    if (depth == VerifyDepth::Symbolic) {
        rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return rep;
    }

    std::vector<cd> lambda;
    for (const auto& w : m.Binf) lambda.emplace_back(w.get_d());
    const CatalogPath& path = e.default_path;
    auto full = path.full_points();

    stage(rep, "residues", [&] {
        auto ok = residue_decomposition(m, full[0], lambda, path.z_seed);
        CMat sum = ok.Binf;
        double rank = 0;
        for (const auto& B : ok.residues) {
            sum += B;
            Eigen::JacobiSVD<CMat> svd(B);
            rank = std::max(rank, svd.singularValues()(1) / svd.singularValues()(0));
        }
        add_value(rep, "residues.sum", sum.norm(), tol.identity);
        add_value(rep, "residues.rank_one", rank, 1e-8);
        add(rep, "residues.traces_admissible", ok.traces_admissible);
    });
    stage(rep, "p6", [&] {
        auto run = extract_p6_solution(m, lambda, path.entry, path.p6_path());
        double worst = 0, drift = 0;
        for (const auto& s : run.samples) {
            worst = std::max(worst, s.residual);
            for (std::size_t i = 0; i < s.r.size(); ++i)
                drift = std::max(drift, std::abs(s.r[i] - run.params.r[i]));
        }
        add_value(rep, "p6.residual", worst, tol.residual);
        add_value(rep, "p6.trace_drift", drift, tol.trace);
    });
    if (depth == VerifyDepth::Full) {
        stage(rep, "schlesinger", [&] {
            auto s = schlesinger_along_path(m, lambda, full, path.z_seed);
            add_value(rep, "schlesinger.residual", s.max_residual, tol.residual);
        });
        stage(rep, "midconv", [&] {
            auto r = midconv_round_trip(m, full[0], path.z_seed);
            add_value(rep, "midconv.trace_error", r.trace_error, tol.trace);
            add_value(rep, "midconv.lambda_error", r.lambda_error, tol.trace);
            add_value(rep, "midconv.rank_one", r.rank_ratio, 1e-8);
            add_value(rep, "midconv.invariant_defect", r.invariant.max_defect(), tol.residual);
        });
    }
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

VerifyReport catalog_verify(const std::string& id, VerifyDepth depth, const Tolerances& tol) {
    return verify_entry(catalog_get(id), depth, tol);
}

std::vector<VerifyReport> catalog_verify_all(VerifyDepth depth, const Tolerances& tol) {
    std::vector<std::future<VerifyReport>> jobs;
    for (const auto& id : catalog_ids())
        jobs.push_back(std::async(std::launch::async, [id, depth, tol] { return catalog_verify(id, depth, tol); }));
    std::vector<VerifyReport> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

}  // namespace flatstruct
