// Acceptance run: one line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "flatstruct/catalog.hpp"
#include "flatstruct/isomono.hpp"
#include "flatstruct/midconv.hpp"
#include "support.hpp"

using namespace fst;

namespace {

constexpr double kResidual = 1e-6;
constexpr double kTrace = 1e-8;
constexpr double kIdentity = 1e-12;
constexpr double kFrozen = 1e-3;
constexpr int kRandomCases = 1000;
constexpr std::uint64_t kSeed = 20240611;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Built {
    CatalogEntry entry;
    PotentialVF pvf;
    SaitoMatrices m;
    std::vector<cd> lambda;
};

std::vector<Built> load() {
    std::vector<Built> out;
    for (const auto& id : catalog_ids()) {
        Built b;
        b.entry = catalog_get(id);
        b.pvf = b.entry.build();
        b.m = build_saito_matrices(b.pvf);
        for (const auto& w : b.m.Binf) b.lambda.emplace_back(w.get_d());
        out.push_back(std::move(b));
    }
    return out;
}

struct Outcome {
    bool ok = true;
    std::ostringstream detail;
    void fail(const std::string& what) {
        if (!ok) detail << "; ";
        else detail.str("");
        ok = false;
        detail << what;
    }
};

bool report(const char* id, const std::function<void(Outcome&)>& body) {
    Outcome o;
    try {
        body(o);
    } catch (const std::exception& e) {
        o.fail(std::string("exception: ") + e.what());
    }
    std::printf("%s %s %s\n", id, o.ok ? "PASS" : "FAIL", o.detail.str().c_str());
    std::fflush(stdout);
    return o.ok;
}

}  // namespace

int main() {
    auto t_load = Clock::now();
    auto corpus = load();
    double load_s = since(t_load);
    bool all = true;

    all &= report("A1", [&](Outcome& o) {
        auto t0 = Clock::now();
        for (const auto& b : corpus) {
            auto w = check_extended_wdvv(b.pvf);
            if (!w.commutators_vanish()) o.fail(b.entry.id + " commutator");
            if (!w.unit_ok) o.fail(b.entry.id + " unit");
            if (!w.homogeneity_ok) o.fail(b.entry.id + " homogeneity");
        }
        double s = since(t0) + load_s;
        if (s >= 60) o.fail("runtime " + std::to_string(s) + " s");
        if (o.ok) o.detail << corpus.size() << " entries exact, " << s << " s (limit 60 s)";
    });

    all &= report("A2", [&](Outcome& o) {
        for (const auto& b : corpus) {
            const auto& id = b.entry.id;
            const auto& m = b.m;
            int n = m.n();
            for (int j = 0; j < n; ++j) {
                Elem expect = Elem::var(m.ring, j).scaled(-m.ring->weights()[j]);
                if (!m.T[n - 1][j].equals(expect)) o.fail(id + " T_n" + std::to_string(j + 1));
            }
            auto d = discriminant(m);  // throws NotMonic
            if (degree_tn(d.h) != n) o.fail(id + " degree of h");
            if (!is_homogeneous(d.h, Rational(n))) o.fail(id + " weight of h");
            auto l = logvf_identities(m);
            if (!l.trace_relation) o.fail(id + " trace relation");
            if (!l.passed()) o.fail(id + " logvf identities");
            auto c = saito_criterion(scaled(m.T, Rational(-1)), d);
            if (!c || *c != 1) o.fail(id + " saito criterion");
        }
        if (o.ok) o.detail << corpus.size() << " entries: T_nj, monic h of weight n, trace relation, c = 1";
    });

    all &= report("A3", [&](Outcome& o) {
        const auto& b = corpus.front();
        if (b.entry.id != "H3" || !b.entry.prepotential) throw std::runtime_error("H3 is not the first entry");
        auto fr = frobenius_check(b.pvf);
        if (!fr) {
            o.fail("no prepotential");
            return;
        }
        Elem F = parse_expr(*b.entry.prepotential, b.pvf.ring);
        if (!fr->F.structurally_equal(F)) o.fail("F = " + serialize_expr(fr->F));
        if (o.ok) o.detail << "F = " << serialize_expr(fr->F) << " (" << F.num().size() << " terms)";
    });

    all &= report("A4", [&](Outcome& o) {
        double worst = 0, drift = 0, slowest = 0;
        for (const auto& b : corpus) {
            auto t0 = Clock::now();
            const auto& path = b.entry.default_path;
            auto run = extract_p6_solution(b.m, b.lambda, path.entry, path.p6_path());
            double s = since(t0);
            slowest = std::max(slowest, s);
            if (run.samples.size() < 20) o.fail(b.entry.id + " fewer than 20 samples");
            double r = 0, d = 0;
            for (const auto& p : run.samples) {
                r = std::max(r, p.residual);
                for (int i = 0; i < 3; ++i) d = std::max(d, std::abs(p.r[i] - run.params.r[i]));
            }
            if (r >= kResidual) o.fail(b.entry.id + " residual " + std::to_string(r));
            if (d >= kTrace) o.fail(b.entry.id + " trace drift");
            if (s >= 30) o.fail(b.entry.id + " runtime");
            worst = std::max(worst, r);
            drift = std::max(drift, d);
        }
        if (o.ok)
            o.detail << "max PVI residual " << worst << " < " << kResidual << ", trace drift " << drift << " < "
                     << kTrace << ", slowest entry " << slowest << " s";
    });

    all &= report("A5", [&](Outcome& o) {
        double worst = 0;
        for (const auto& b : corpus) {
            const auto& path = b.entry.default_path;
            auto run = schlesinger_along_path(b.m, b.lambda, path.full_points(), path.z_seed);
            if (run.max_residual >= kResidual) o.fail(b.entry.id + " " + std::to_string(run.max_residual));
            worst = std::max(worst, run.max_residual);
        }
        if (o.ok) o.detail << "max Schlesinger residual " << worst << " < " << kResidual;
    });

    all &= report("A6", [&](Outcome& o) {
        double pvi = 0, sch = 0, tr = 0, inf = 0;
        int failed = 0;
        for (int k = 0; k < kRandomCases; ++k) {
            auto r = jm_round_trip(random_jm_case(kSeed + k));
            if (!r.passed(kResidual, kIdentity)) ++failed;
            pvi = std::max(pvi, r.pvi_residual);
            sch = std::max(sch, r.schlesinger_residual);
            tr = std::max(tr, r.trace_error);
            inf = std::max(inf, r.ainf_error);
        }
        if (failed) o.fail(std::to_string(failed) + " of " + std::to_string(kRandomCases) + " cases");
        o.detail << (o.ok ? "" : "; ") << kRandomCases << " cases: PVI " << pvi << ", Schlesinger " << sch
                 << ", tr A_i " << tr << ", A_inf " << inf;
    });

    all &= report("A7", [&](Outcome& o) {
        double trace = 0, lam = 0, rank = 0, inv = 0;
        int runs = 0;
        for (const auto& b : corpus) {
            const auto& path = b.entry.default_path;
            auto pts = path.full_points();
            // three sample points: start, middle, end
            ZTracker zt(b.m.ring, pts.front(), path.z_seed);
            for (std::size_t k : {std::size_t(0), pts.size() / 2, pts.size() - 1}) {
                cd z = zt.at(pts[k]);
                auto r = midconv_round_trip(b.m, pts[k], z);
                ++runs;
                if (!r.passed(kTrace, kResidual)) o.fail(b.entry.id + " point " + std::to_string(k));
                trace = std::max(trace, r.trace_error);
                lam = std::max(lam, r.lambda_error);
                rank = std::max(rank, r.rank_ratio);
                inv = std::max(inv, r.invariant.max_defect());
            }
        }
        o.detail << (o.ok ? "" : "; ") << runs << " snapshots: traces " << trace << ", Gamma_inf " << lam
                 << ", rank ratio " << rank << ", invariance defect " << inv;
    });

    all &= report("A8", [&](Outcome& o) {
        const Built* lt8 = nullptr;
        for (const auto& b : corpus)
            if (b.entry.id == "LT8") lt8 = &b;
        PotentialVF bad = lt8->pvf;
        bad.g[2] = bad.g[2] + Elem::var(bad.ring, 0).pow(7);
        auto w = check_extended_wdvv(bad);
        if (w.passed() || w.commutators_vanish()) o.fail("perturbed Klein passes WDVV");
        double frozen = 1e300;
        double h = 2e-3;
        for (const auto& p : lt8->entry.default_path.full_points()) {
            std::vector<OkuboNumeric> snaps;
            for (int q = -2; q <= 2; ++q)
                snaps.push_back(residue_decomposition(lt8->m, {p[0], p[1] + q * h, p[2]}, lt8->lambda));
            for (auto& s : snaps) s.residues[0] = snaps[2].residues[0];
            frozen = std::min(frozen, schlesinger_residual(snaps, h));
        }
        if (frozen <= kFrozen) o.fail("frozen residue residual " + std::to_string(frozen));
        if (o.ok) o.detail << "perturbed Klein rejected; frozen residue residual >= " << frozen << " > " << kFrozen;
    });

    all &= report("A9", [&](Outcome& o) {
        std::mt19937_64 rng(kSeed);
        int product = 0, mixed = 0, roundtrip = 0, hom = 0;
        for (int k = 0; k < kRandomCases; ++k) {
            RingPtr r = k % 2 ? h3p_ring() : klein_ring();
            Elem f = random_elem(r, rng), g = random_elem(r, rng);
            int i = static_cast<int>(rng() % 3), j = static_cast<int>(rng() % 3);
            product += partial(f * g, i).equals(partial(f, i) * g + f * partial(g, i));
            mixed += partial(partial(f, i), j).equals(partial(partial(f, j), i));
            roundtrip += parse_expr(serialize_expr(f), r).structurally_equal(f);
            auto t = random_point(rng, 3);
            cd z = r->has_extension() ? relation_roots(*r, t)[0] : cd(0);
            Evaluator ev(r, {f, g, f + g, f * g});
            auto v = ev(t, z);
            double s = 1 + std::abs(v[0]) + std::abs(v[1]);
            hom += std::abs(v[2] - (v[0] + v[1])) < 1e-12 * s && std::abs(v[3] - v[0] * v[1]) < 1e-12 * s * s;
        }
        for (auto [name, count] : {std::pair{"product rule", product}, {"mixed partials", mixed},
                                   {"parse/serialize", roundtrip}, {"eval homomorphism", hom}})
            if (count != kRandomCases) o.fail(std::string(name) + " " + std::to_string(count));
        if (o.ok) o.detail << kRandomCases << " cases each, seed " << kSeed;
    });

    return all ? 0 : 1;
}
