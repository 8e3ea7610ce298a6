// flatstruct command line front end.
#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "flatstruct/catalog.hpp"
#include "flatstruct/isomono.hpp"
#include "flatstruct/midconv.hpp"

using namespace flatstruct;
using json = nlohmann::ordered_json;

namespace {

enum Exit { Pass = 0, CheckFailed = 1, InputError = 2, NumericFailure = 3 };

struct Options {
    std::string catalog_id;
    std::string input;
    std::string path_file;
    std::string entry;
    std::string json_file;
    std::string depth = "full";
    std::uint64_t seed = 1;
    int cases = 1;
    bool all = false;
    Tolerances tol;
};

json cplx(cd v) { return json::array({v.real(), v.imag()}); }

json cplx_list(const auto& v) {
    json a = json::array();
    for (cd x : v) a.push_back(cplx(x));
    return a;
}

std::string slurp(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw SchemaError("cannot read '" + file + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// A catalog entry, either by id or from a file holding an entry or a bare pvf document.
struct Subject {
    std::string label;
    PotentialVF pvf;
    std::optional<CatalogPath> path;
};

Subject resolve(const Options& o) {
    if (o.catalog_id.empty() == o.input.empty()) throw SchemaError("give exactly one of --catalog and --input");
    Subject s;
    if (!o.catalog_id.empty()) {
        auto e = catalog_get(o.catalog_id);
        s.label = e.id;
        s.pvf = e.build();
        s.path = e.default_path;
    } else {
        std::string text = slurp(o.input);
        s.label = o.input;
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw SchemaError(std::string("input is not JSON: ") + e.what());
        }
        if (j.contains("pvf")) {
            auto e = catalog_entry_from_json(text);
            s.pvf = e.build();
            s.path = e.default_path;
        } else {
            s.pvf = parse_pvf(text);
        }
    }
    if (!o.path_file.empty()) s.path = path_from_json(slurp(o.path_file));
    if (!o.entry.empty() && s.path) {
        int i = 0, j = 0;
        char comma = 0;
        std::istringstream in(o.entry);
        if (!(in >> i >> comma >> j) || comma != ',' || i < 1 || j < 1 || i == j || i > 3 || j > 3)
            throw SchemaError("--entry expects i,j with distinct 1 <= i, j <= 3");
        s.path->entry = {i - 1, j - 1};
    }
    return s;
}

const CatalogPath& need_path(const Subject& s) {
    if (!s.path) throw SchemaError("this verb needs a path; pass --path or use a catalog entry");
    return *s.path;
}

std::vector<cd> lambda_of(const SaitoMatrices& m) {
    std::vector<cd> out;
    for (const auto& w : m.Binf) out.emplace_back(w.get_d());
    return out;
}

json header(const std::string& verb, const Subject* s, const Options& o) {
    json h;
    h["verb"] = verb;
    if (s) h["input"] = s->label;
    h["tolerances"] = {{"symbolic", "exact"}, {"residual", o.tol.residual}, {"identity", o.tol.identity},
                       {"trace", o.tol.trace}};
    return h;
}

json entry_json(std::pair<int, int> e) { return json::array({e.first + 1, e.second + 1}); }

int run_verify_wdvv(const Options& o, json& out) {
    auto s = resolve(o);
    out = header("verify-wdvv", &s, o);
    auto rep = check_extended_wdvv(s.pvf);
    json coms = json::array(), failing = json::array();
    for (const auto& [pq, M] : rep.commutators) {
        json nz = json::array();
        for (std::size_t i = 0; i < M.size(); ++i)
            for (std::size_t j = 0; j < M[i].size(); ++j)
                if (!M[i][j].is_zero()) nz.push_back({i + 1, j + 1, serialize_expr(M[i][j])});
        bool zero = nz.empty();
        coms.push_back({{"p", pq.first + 1}, {"q", pq.second + 1}, {"zero", zero}, {"nonzero", nz}});
        if (!zero) {
            failing.push_back(json::array({pq.first + 1, pq.second + 1}));
            std::cerr << "commutator [B~(" << pq.first + 1 << "), B~(" << pq.second + 1 << ")] is nonzero\n";
        }
    }
    out["unit"] = rep.unit_ok;
    out["homogeneity"] = rep.homogeneity_ok;
    out["flat_normalization"] = rep.flat_normalization_ok;
    out["saito_relations"] = rep.saito_relations_ok;
    out["commutators"] = coms;
    out["failing_commutators"] = failing;
    out["passed"] = rep.passed();
    return rep.passed() ? Pass : CheckFailed;
}

int run_saito(const Options& o, json& out) {
    auto s = resolve(o);
    out = header("saito", &s, o);
    auto m = build_saito_matrices(s.pvf);
    out["C"] = json::parse(serialize_matrix(m.C));
    out["T"] = json::parse(serialize_matrix(m.T));
    json bt = json::array();
    for (const auto& B : m.Btilde) bt.push_back(json::parse(serialize_matrix(B)));
    out["Btilde"] = bt;
    json binf = json::array();
    for (const auto& w : m.Binf) binf.push_back(to_string(w));
    out["Binf"] = binf;
    bool rel = check_saito_relations(m), flat = check_flat_normalization(m);
    out["saito_relations"] = rel;
    out["flat_normalization"] = flat;
    out["passed"] = rel && flat;
    return rel && flat ? Pass : CheckFailed;
}

int run_logvf(const Options& o, json& out) {
    auto s = resolve(o);
    out = header("logvf", &s, o);
    auto m = build_saito_matrices(s.pvf);
    auto l = logvf_identities(m);
    auto d = discriminant(m);
    bool homog = is_homogeneous(d.h, Rational(m.n()));
    auto c = saito_criterion(scaled(m.T, Rational(-1)), d);
    out["h"] = serialize_expr(d.h);
    out["h_homogeneous"] = homog;
    out["saito_constant"] = c ? json(to_string(*c)) : json(nullptr);
    out["identities"] = {{"euler_row", l.euler_row},           {"euler_scaling", l.euler_scaling},
                         {"s1_relation", l.s1_relation},       {"weight_duality", l.weight_duality},
                         {"trace_relation", l.trace_relation}, {"failed", l.failed}};
    bool ok = l.passed() && homog && c && *c == 1;
    out["passed"] = ok;
    return ok ? Pass : CheckFailed;
}

int run_extract_p6(const Options& o, json& out) {
    auto s = resolve(o);
    const auto& path = need_path(s);
    out = header("extract-p6", &s, o);
    auto m = build_saito_matrices(s.pvf);
    auto run = extract_p6_solution(m, lambda_of(m), path.entry, path.p6_path());
    double worst = 0, drift = 0;
    json samples = json::array();
    for (const auto& p : run.samples) {
        worst = std::max(worst, p.residual);
        for (std::size_t i = 0; i < 3; ++i) drift = std::max(drift, std::abs(p.r[i] - run.params.r[i]));
        samples.push_back({{"s", p.s}, {"t", cplx(p.t)}, {"y", cplx(p.y)}, {"dy", cplx(p.dy)},
                           {"d2y", cplx(p.d2y)}, {"residual", p.residual}});
    }
    out["entry"] = entry_json(run.entry);
    out["theta"] = cplx_list(std::array{run.params.theta0, run.params.theta1, run.params.thetat, run.params.thetainf});
    out["max_residual"] = worst;
    out["trace_drift"] = drift;
    out["samples"] = samples;
    bool ok = worst < o.tol.residual && drift < o.tol.trace;
    out["passed"] = ok;
    std::cerr << "PVI residual " << worst << ", trace drift " << drift << "\n";
    return ok ? Pass : CheckFailed;
}

int run_params(const Options& o, json& out) {
    auto s = resolve(o);
    const auto& path = need_path(s);
    out = header("params", &s, o);
    auto m = build_saito_matrices(s.pvf);
    auto p = p6_parameters(m, path.points().front(), lambda_of(m), path.entry, path.z_seed);
    out["entry"] = entry_json(path.entry);
    out["point"] = cplx_list(path.points().front());
    out["theta"] = {{"theta0", cplx(p.theta0)}, {"theta1", cplx(p.theta1)}, {"thetat", cplx(p.thetat)},
                    {"thetainf", cplx(p.thetainf)}};
    out["alpha"] = cplx(p.alpha);
    out["beta"] = cplx(p.beta);
    out["gamma"] = cplx(p.gamma);
    out["delta"] = cplx(p.delta);
    out["r"] = cplx_list(p.r);
    out["passed"] = true;
    return Pass;
}

int run_schlesinger(const Options& o, json& out) {
    auto s = resolve(o);
    const auto& path = need_path(s);
    out = header("schlesinger", &s, o);
    auto m = build_saito_matrices(s.pvf);
    auto run = schlesinger_along_path(m, lambda_of(m), path.full_points(), path.z_seed);
    out["residuals"] = run.residuals;
    out["max_residual"] = run.max_residual;
    out["trace_drift"] = run.trace_drift;
    bool ok = run.max_residual < o.tol.residual && run.trace_drift < o.tol.trace;
    out["passed"] = ok;
    std::cerr << "Schlesinger residual " << run.max_residual << "\n";
    return ok ? Pass : CheckFailed;
}

int run_midconv(const Options& o, json& out) {
    auto s = resolve(o);
    const auto& path = need_path(s);
    out = header("midconv", &s, o);
    auto m = build_saito_matrices(s.pvf);
    auto r = midconv_round_trip(m, path.full_points().front(), path.z_seed);
    out["lambda"] = cplx_list(r.lambda);
    out["original_traces"] = cplx_list(r.original_traces);
    out["recovered_traces"] = cplx_list(r.recovered_traces);
    out["recovered_lambda"] = cplx_list(r.recovered_lambda);
    out["trace_error"] = r.trace_error;
    out["lambda_error"] = r.lambda_error;
    out["rank_ratio"] = r.rank_ratio;
    out["sum_error"] = r.sum_error;
    out["invariant"] = {{"dim_K", r.invariant.dim_K}, {"dim_L", r.invariant.dim_L},
                        {"defect", r.invariant.max_defect()}};
    bool ok = r.passed(o.tol.trace, o.tol.residual);
    out["passed"] = ok;
    return ok ? Pass : CheckFailed;
}

int run_jm(const Options& o, json& out) {
    out = header("jm-roundtrip", nullptr, o);
    out["seed"] = o.seed;
    json cases = json::array();
    bool ok = true;
    for (int k = 0; k < o.cases; ++k) {
        auto c = random_jm_case(o.seed + std::uint64_t(k));
        auto r = jm_round_trip(c);
        bool pass = r.passed(o.tol.residual, o.tol.identity);
        ok = ok && pass;
        cases.push_back({{"theta", cplx_list(c.thetas)},
                         {"kappa", cplx_list(c.kappas)},
                         {"pvi_residual", r.pvi_residual},
                         {"schlesinger_residual", r.schlesinger_residual},
                         {"trace_error", r.trace_error},
                         {"ainf_error", r.ainf_error},
                         {"passed", pass}});
    }
    out["cases"] = cases;
    out["passed"] = ok;
    return ok ? Pass : CheckFailed;
}

int run_catalog_list(const Options& o, json& out) {
    out = header("catalog list", nullptr, o);
    out["ids"] = catalog_ids();
    for (const auto& id : catalog_ids()) std::cout << id << "\n";
    return Pass;
}

int run_catalog_get(const std::string& id, json& out) {
    out = json::parse(catalog_entry_to_json(catalog_get(id)));
    return Pass;
}

int run_catalog_verify(const Options& o, const std::string& id, json& out) {
    auto depth = parse_depth(o.depth);
    std::vector<VerifyReport> reps;
    if (o.all) {
        reps = catalog_verify_all(depth, o.tol);
    } else {
        if (id.empty()) throw SchemaError("give an entry id or --all");
        reps.push_back(catalog_verify(id, depth, o.tol));
    }
    out = header("catalog verify", nullptr, o);
    out["depth"] = to_string(depth);
    json rs = json::array();
    bool ok = true;
    for (const auto& r : reps) {
        rs.push_back(json::parse(r.to_json()));
        ok = ok && r.passed();
        std::cerr << r.id << ": " << (r.passed() ? "pass" : "FAIL") << "\n";
        for (const auto& c : r.checks)
            if (!c.passed) std::cerr << "  " << c.name << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
    }
    out["reports"] = rs;
    out["passed"] = ok;
    return ok ? Pass : CheckFailed;
}

int exit_for(ErrorKind k) {
    switch (k) {
        case ErrorKind::Input: return InputError;
        case ErrorKind::Numeric: return NumericFailure;
        case ErrorKind::Check: return CheckFailed;
    }
    return InputError;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Flat structure verification and construction"};
    app.require_subcommand(1);
    Options o;
    std::string id;

    auto positive = CLI::PositiveNumber;
    auto common = [&](CLI::App* c, bool numeric) {
        c->add_option("--catalog", o.catalog_id, "catalog entry id");
        c->add_option("--input", o.input, "pvf document or catalog entry file")->check(CLI::ExistingFile);
        c->add_option("--json", o.json_file, "write the JSON report here instead of stdout");
        c->add_option("--tol-residual", o.tol.residual, "PVI and Schlesinger residual tolerance")->check(positive);
        c->add_option("--tol-identity", o.tol.identity, "eigen and residue identity tolerance")->check(positive);
        c->add_option("--tol-trace", o.tol.trace, "trace constancy tolerance")->check(positive);
        if (numeric) {
            c->add_option("--path", o.path_file, "path file overriding the default path")->check(CLI::ExistingFile);
            c->add_option("--entry", o.entry, "matrix entry i,j for the PVI solution");
        }
    };

    std::map<std::string, std::function<int(json&)>> verbs;
    auto add = [&](const std::string& name, const std::string& help, bool numeric, auto fn) {
        common(app.add_subcommand(name, help), numeric);
        verbs[name] = [&o, fn](json& out) { return fn(o, out); };
    };
    add("verify-wdvv", "exact extended WDVV check", false, run_verify_wdvv);
    add("saito", "Saito matrices C, B~, T, B_inf", false, run_saito);
    add("logvf", "discriminant and logarithmic vector field identities", false, run_logvf);
    add("extract-p6", "PVI solution along a path", true, run_extract_p6);
    add("params", "PVI parameters at the path start", true, run_params);
    add("schlesinger", "Schlesinger residual along a path", true, run_schlesinger);
    add("midconv", "middle convolution round trip", true, run_midconv);

    auto* jm = app.add_subcommand("jm-roundtrip", "Hamiltonian flow through the Jimbo-Miwa matrices");
    jm->add_option("--seed", o.seed, "random seed");
    jm->add_option("--cases", o.cases, "number of random cases")->check(positive);
    jm->add_option("--json", o.json_file, "write the JSON report here instead of stdout");
    jm->add_option("--tol-residual", o.tol.residual)->check(positive);
    jm->add_option("--tol-identity", o.tol.identity)->check(positive);
    verbs["jm-roundtrip"] = [&o](json& out) { return run_jm(o, out); };

    auto* cat = app.add_subcommand("catalog", "built-in corpus");
    cat->require_subcommand(1);
    auto* list = cat->add_subcommand("list", "entry ids");
    auto* get = cat->add_subcommand("get", "entry document");
    get->add_option("id", id)->required();
    auto* ver = cat->add_subcommand("verify", "verify entries");
    ver->add_option("id", id);
    ver->add_flag("--all", o.all, "verify every entry in parallel");
    ver->add_option("--depth", o.depth, "symbolic, numeric or full")
        ->check(CLI::IsMember({"symbolic", "numeric", "full"}));
    ver->add_option("--json", o.json_file, "write the JSON report here instead of stdout");
    ver->add_option("--tol-residual", o.tol.residual)->check(positive);
    ver->add_option("--tol-identity", o.tol.identity)->check(positive);
    ver->add_option("--tol-trace", o.tol.trace)->check(positive);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? Pass : InputError;
    }

    json out;
    int code = Pass;
    try {
        if (list->parsed()) {
            code = run_catalog_list(o, out);
        } else if (get->parsed()) {
            code = run_catalog_get(id, out);
        } else if (ver->parsed()) {
            code = run_catalog_verify(o, id, out);
        } else {
            for (auto* sub : app.get_subcommands()) code = verbs.at(sub->get_name())(out);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        code = exit_for(e.kind());
        out = {{"error", e.name()}, {"message", e.what()}, {"passed", false}};
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        code = InputError;
        out = {{"error", "SchemaError"}, {"message", e.what()}, {"passed", false}};
    }

    if (list->parsed() && o.json_file.empty()) return code;
    std::string text = out.dump(2) + "\n";
    if (o.json_file.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(o.json_file);
        if (!f) {
            std::cerr << "error: cannot write '" << o.json_file << "'\n";
            return InputError;
        }
        f << text;
    }
    return code;
}
