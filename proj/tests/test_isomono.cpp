#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "flatstruct/exprio.hpp"
#include "flatstruct/isomono.hpp"
#include "flatstruct/p6.hpp"
#include "support.hpp"

using namespace fst;

namespace {

const char* kKlein = R"({"name": "LT8", "weights": ["2/7", "3/7", "1"],
  "g": ["(-2*t1^3*t2 + t2^3 + 12*t1*t3)/12",
        "(2*t1^5 + 5*t1^2*t2^2 + 10*t2*t3)/10",
        "(-8*t1^7 + 21*t1^4*t2^2 + 7*t1*t2^4 + 28*t3^2)/56"]})";

SaitoMatrices klein() { return build_saito_matrices(parse_pvf(kKlein)); }

std::vector<cd> weights_of(const SaitoMatrices& m) {
    std::vector<cd> out;
    for (const auto& w : m.Binf) out.emplace_back(w.get_d());
    return out;
}

CMat adjugate(const CMat& M) {
    int n = static_cast<int>(M.rows());
    CMat adj(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            CMat minor(n - 1, n - 1);
            for (int a = 0, ra = 0; a < n; ++a) {
                if (a == j) continue;
                for (int b = 0, cb = 0; b < n; ++b) {
                    if (b == i) continue;
                    minor(ra, cb++) = M(a, b);
                }
                ++ra;
            }
            adj(i, j) = ((i + j) % 2 ? -1.0 : 1.0) * minor.determinant();
        }
    return adj;
}

}  // namespace

TEST_CASE("rank one residue for n = 1") {
    CMat T(1, 1);
    T << cd(0.3);
    auto ok = okubo_from_matrices(T, {CMat::Identity(1, 1)}, {cd(0.7)});
    CHECK(std::abs(ok.residues[0](0, 0) + 0.7) < 1e-15);
    CHECK(std::abs(ok.r[0] + 0.7) < 1e-15);
}

TEST_CASE("klein residues") {
    auto m = klein();
    auto lam = weights_of(m);
    std::vector<cd> pt{cd(1), cd(0.5), cd(0.2)};
    auto ok = residue_decomposition(m, pt, lam);
    CMat sum = CMat::Zero(3, 3);
    for (const auto& B : ok.residues) sum += B;
    CHECK((sum + ok.Binf).norm() < 1e-12);
    for (int i = 0; i < 3; ++i) {
        // independent oracle: the residue equals -adj(z_i - T) B_inf / prod_{j != i}(z_i - z_j)
        CMat zT = ok.z(i) * CMat::Identity(3, 3) - ok.T;
        cd den = 1;
        for (int j = 0; j < 3; ++j)
            if (j != i) den *= ok.z(i) - ok.z(j);
        CMat oracle = -adjugate(zT) * ok.Binf / den;
        CHECK((ok.residues[i] - oracle).norm() < 1e-10 * std::max(1.0, oracle.norm()));
        Eigen::JacobiSVD<CMat> svd(ok.residues[i]);
        CHECK(svd.singularValues()(1) < 1e-10 * svd.singularValues()(0));
    }
    CHECK(ok.traces_admissible);
    CHECK(std::abs(ok.r[0] + ok.r[1] + ok.r[2] + 12.0 / 7) < 1e-12);
}

TEST_CASE("rank violation is reported") {
    CMat T = CMat::Zero(2, 2);
    T(1, 1) = 1;
    CMat Binf = CMat::Identity(2, 2);
    CHECK_NOTHROW(okubo_from_matrices(T, {}, {cd(1), cd(2)}));
    // a repeated eigenvalue cannot give rank one residues
    CHECK_THROWS(okubo_from_matrices(CMat::Zero(2, 2), {}, {cd(1), cd(2)}));
}

TEST_CASE("symbolic integrability of klein") {
    auto m = klein();
    auto rep = check_integrability(m);
    CHECK(rep.commute);
    CHECK(rep.ci1);
    CHECK(rep.ci3);
    CHECK(rep.passed());
    CHECK(check_integrability(m, Rational(2, 3)).passed());
}

TEST_CASE("nilpotent connection has a closed form") {
    CMat A(3, 3);
    A << 0, 1, 2, 0, 0, 3, 0, 0, 0;
    ConnectionSampler om = [A](const std::vector<cd>&) { return std::vector<CMat>{A}; };
    PathSpec p;
    p.points = {{cd(0)}, {cd(0.4, 0.3)}, {cd(1)}};
    auto res = integrate_pfaffian(om, p, CMat::Identity(3, 3));
    // Y(x) = exp(x A) = I + x A + x^2 A^2 / 2
    CMat expect = CMat::Identity(3, 3) + A + A * A / 2.0;
    CHECK((res.Y - expect).norm() < 1e-10);
    CHECK(res.liouville_defect < 1e-12);
    CHECK(res.at_points.size() == 3);
}

TEST_CASE("trivial loop returns the identity") {
    CMat A(2, 2);
    A << 0.3, 1, -0.2, 0.1;
    ConnectionSampler om = [A](const std::vector<cd>& x) {
        return std::vector<CMat>{A * x[0] + CMat::Identity(2, 2)};
    };
    PathSpec p;
    p.points = {{cd(0)}, {cd(1)}, {cd(1, 1)}, {cd(0, 1)}, {cd(0)}};
    auto res = integrate_pfaffian(om, p, CMat::Identity(2, 2));
    CHECK((res.Y - CMat::Identity(2, 2)).norm() < 1e-9);
    CHECK(std::abs(res.trace_integral) < 1e-12);
}

TEST_CASE("klein local monodromy") {
    auto m = klein();
    auto ok = residue_decomposition(m, {cd(1), cd(0.5), cd(0.2)}, weights_of(m));
    auto om = okubo_z_connection(ok.T, ok.Binf);
    double sep = min_separation(ok.z);
    for (int i = 0; i < 3; ++i) {
        CMat M = monodromy_around(om, ok.z(i), sep / 3, 1, 128, 1e-11);
        // conjugate to exp(2 pi i diag(0, 0, r_i))
        Eigen::ComplexEigenSolver<CMat> es(M);
        std::vector<cd> ev(es.eigenvalues().data(), es.eigenvalues().data() + 3);
        cd target = std::exp(cd(0, 2 * std::numbers::pi) * ok.r[i]);
        int ones = 0, hits = 0;
        for (cd e : ev) {
            if (std::abs(e - 1.0) < 1e-7) ++ones;
            else if (std::abs(e - target) < 1e-7) ++hits;
        }
        CHECK(ones == 2);
        CHECK(hits == 1);
    }
}

TEST_CASE("klein residues satisfy the schlesinger system") {
    auto m = klein();
    auto lam = weights_of(m);
    double h = 2e-3;
    for (double t2 : {0.4, 0.5, 0.6}) {
        std::vector<OkuboNumeric> snaps;
        for (int q = -2; q <= 2; ++q) snaps.push_back(residue_decomposition(m, {cd(1), cd(t2 + q * h), cd(0)}, lam));
        double res = schlesinger_residual(snaps, h);
        CHECK_MESSAGE(res < 1e-6, "t2 = " << t2 << " residual " << res);
        // a frozen residue is not a solution
        for (auto& s : snaps) s.residues[0] = snaps[2].residues[0];
        CHECK(schlesinger_residual(snaps, h) > 1e-3);
    }
    std::vector<OkuboNumeric> few(4);
    CHECK_THROWS_AS(schlesinger_residual(few, h), InsufficientSamples);
}

TEST_CASE("okubo normal form") {
    auto m = klein();
    auto ok = residue_decomposition(m, {cd(1), cd(0.5), cd(0.2)}, weights_of(m));
    auto nf = okubo_normal_form(ok.residues, ok.Binf);
    CHECK((nf.Pinv * nf.P - CMat::Identity(3, 3)).norm() < 1e-9);
    for (int i = 0; i < 3; ++i) {
        CMat E = CMat::Zero(3, 3);
        E(i, i) = 1;
        CHECK((ok.residues[i] + nf.P * E * nf.Pinv * ok.Binf).norm() < 1e-9);
    }
    // P^{-1} B_inf P is B_inf written in the eigenbasis of T
    CHECK((nf.Bprime - nf.Pinv * ok.Binf * nf.P).norm() < 1e-12);
    auto bad = ok.residues;
    bad[0] *= 2.0;
    CHECK_THROWS_AS(okubo_normal_form(bad, ok.Binf), FactorizationFailed);
}

TEST_CASE("jimbo-miwa matrices") {
    std::array<cd, 3> th{cd(3.0 / 7), cd(-2.0 / 9), cd(5.0 / 11)};
    cd k1 = 1.0 / 3, k2 = -(th[0] + th[1] + th[2] + k1);
    auto s = jm_build(0.3, 1.4, 2.0, th, {k1, k2}, -0.5);
    // eigenvalues of A_i are {0, theta_i}
    for (auto [A, t] : {std::pair{s.A0, th[0]}, std::pair{s.A1, th[1]}, std::pair{s.At, th[2]}}) {
        CHECK(std::abs(A.determinant()) < 1e-12);
        CHECK(std::abs(A.trace() - t) < 1e-12);
    }
    M2 Ainf = s.Ainf();
    CHECK(std::abs(Ainf(0, 1)) < 1e-12);
    CHECK(std::abs(Ainf(0, 0) - k1) < 1e-12);
    CHECK(std::abs(Ainf(1, 1) - k2) < 1e-12);
    // the (1,2) entry of the sum vanishes at x = y
    cd x = s.y;
    cd a12 = s.A0(0, 1) / x + s.A1(0, 1) / (x - 1.0) + s.At(0, 1) / (x - s.t);
    CHECK(std::abs(a12) < 1e-12);
    // round trip
    auto d = jm_extract(s.A0, s.A1, s.At, th, s.t);
    CHECK(std::abs(d.y - 0.3) < 1e-12);
    CHECK(std::abs(d.ztilde - 1.4) < 1e-12);
    CHECK(std::abs(d.k - 2.0) < 1e-12);

    CHECK_THROWS_AS(jm_build(0.3, 1.4, 2.0, th, {k1, k1}, -0.5), SchemaError);
    std::array<cd, 3> th2{cd(0.1), cd(0.2), cd(0.3)};
    CHECK_THROWS_AS(jm_build(0.3, 1.4, 2.0, th2, {cd(-0.3), cd(-0.3)}, -0.5), DegenerateTheta);
    CHECK_THROWS_AS(jm_build(-0.5, 1.4, 2.0, th, {k1, k2}, -0.5), PoleAtY);
}

TEST_CASE("hamiltonian flow solves PVI and the schlesinger system") {
    std::array<cd, 3> th{cd(0.3), cd(-0.2), cd(0.45)};
    cd k1 = 0.35, k2 = -(th[0] + th[1] + th[2] + k1);
    auto p = params_from_thetas(th[0], th[1], th[2], k1 - k2);
    HamState init{cd(0.3), cd(0.55, 0.1), cd(0.8), cd(1.0)};
    std::vector<cd> ts;
    for (int k = 0; k < 20; ++k) ts.push_back(cd(0.3 + 0.01 * k, 0.02 * k));
    auto traj = integrate_p6_hamiltonian(th, {k1, k2}, init, ts, 2e-3);
    REQUIRE(traj.size() == 20);
    std::vector<P6Sample> samples;
    double worst = 0;
    for (const auto& h : traj) {
        P6Sample s;
        s.t = h.state.t;
        s.y = h.state.y;
        s.dy = h.dy;
        s.d2y = h.d2y;
        samples.push_back(s);
        std::array<JMSystem, 5> sys;
        for (int q = 0; q < 5; ++q) {
            const auto& st = h.stencil[q];
            sys[q] = jm_build(st.y, st.ztilde, st.k, th, {k1, k2}, st.t);
        }
        worst = std::max(worst, jm_schlesinger_residual(sys, h.h));
    }
    CHECK(p6_residual(samples, p) < 1e-6);
    CHECK(worst < 1e-6);
}

TEST_CASE("random jimbo-miwa round trips") {
    for (std::uint64_t seed : {1u, 2u, 3u, 42u}) {
        auto c = random_jm_case(seed);
        CHECK(std::abs(c.kappas[0] + c.kappas[1] + c.thetas[0] + c.thetas[1] + c.thetas[2]) < 1e-14);
        auto r = jm_round_trip(c);
        CHECK(r.steps == 20);
        CHECK(r.passed());
    }
    auto a = random_jm_case(9), b = random_jm_case(9);
    CHECK(a.init.y == b.init.y);
}
