#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "flatstruct/exprio.hpp"
#include "flatstruct/midconv.hpp"
#include "support.hpp"

using namespace fst;

namespace {

const char* kKlein = R"({"name": "LT8", "weights": ["2/7", "3/7", "1"],
  "g": ["(-2*t1^3*t2 + t2^3 + 12*t1*t3)/12",
        "(2*t1^5 + 5*t1^2*t2^2 + 10*t2*t3)/10",
        "(-8*t1^7 + 21*t1^4*t2^2 + 7*t1*t2^4 + 28*t3^2)/56"]})";

struct Fixture {
    SaitoMatrices m = build_saito_matrices(parse_pvf(kKlein));
    SaitoEvaluator ev{m};
    std::vector<cd> lam, shifted;
    Fixture() {
        for (const auto& w : m.Binf) lam.emplace_back(w.get_d());
        for (cd l : lam) shifted.push_back(l - lam.back());
    }
    OkuboNumeric okubo(const std::vector<cd>& x, const std::vector<cd>& l, const Eigensystem* prev = nullptr) const {
        auto ok = okubo_from_matrices(ev.T(x, 0), ev.Btilde(x, 0), l, prev);
        ok.point = x;
        return ok;
    }
    RankOneSampler sampler(const std::vector<cd>& x0) const {
        auto ok0 = okubo(x0, shifted);
        Eigensystem e0{ok0.z, ok0.P};
        return [this, e0](const std::vector<cd>& x) { return truncate_okubo(okubo(x, shifted, &e0)); };
    }
};

std::vector<cd> sorted(std::vector<cd> v) {
    std::sort(v.begin(), v.end(), [](cd a, cd b) { return root_less(a, b, 1e-9); });
    return v;
}

}  // namespace

TEST_CASE("truncation of klein") {
    Fixture f;
    std::vector<cd> x{cd(1), cd(0.5), cd(0.2)};
    auto sys = truncate_okubo(f.okubo(x, f.shifted));
    CHECK(sys.n == 3);
    CHECK(sys.Gamma[0].rows() == 2);
    CHECK(std::abs(sys.lambda[0] - (2.0 / 7 - 1)) < 1e-15);
    CHECK(std::abs(sys.lambda[1] - (3.0 / 7 - 1)) < 1e-15);
    CMat sum = sys.Gamma_inf();
    for (const auto& G : sys.Gamma) sum += G;
    CHECK(sum.norm() < 1e-10);
    CHECK((sys.B * sys.A - CMat::Identity(2, 2)).norm() < 1e-10);
    for (int j = 0; j < 3; ++j)
        CHECK((sys.Gamma[j] + sys.B.col(j) * sys.A.row(j) * sys.Gamma_inf()).norm() < 1e-10);
}

TEST_CASE("truncated residues have rank one at random points") {
    Fixture f;
    std::mt19937_64 rng(7);
    for (int k = 0; k < 5; ++k) {
        auto x = random_point(rng, 3);
        auto sys = truncate_okubo(f.okubo(x, f.shifted));
        for (const auto& G : sys.Gamma) {
            Eigen::JacobiSVD<CMat> svd(G);
            CHECK(svd.singularValues()(1) < 1e-9 * svd.singularValues()(0));
        }
    }
}

TEST_CASE("eigenvalue gradients match finite differences") {
    Fixture f;
    std::vector<cd> x{cd(1), cd(0.5), cd(0.2)};
    auto ok = f.okubo(x, f.lam);
    auto dz = eigenvalue_gradients(ok);
    Eigensystem e0{ok.z, ok.P};
    double h = 1e-3;
    for (int i = 0; i < 3; ++i) {
        std::array<CVec, 5> zs;
        for (int q = -2; q <= 2; ++q) {
            auto xq = x;
            xq[i] += double(q) * h;
            zs[q + 2] = f.okubo(xq, f.lam, &e0).z;
        }
        CVec d = stencil_d1(zs, h);
        for (int j = 0; j < 3; ++j) CHECK(std::abs(d(j) - dz[j][i]) < 1e-9);
    }
}

TEST_CASE("truncation errors") {
    Fixture f;
    std::vector<cd> x{cd(1), cd(0.5), cd(0.2)};
    CHECK_THROWS_AS(truncate_okubo(f.okubo(x, f.lam)), ConditionDViolation);
    CMat T(1, 1);
    T << cd(0.3);
    CHECK_THROWS_AS(truncate_okubo(okubo_from_matrices(T, {CMat::Identity(1, 1)}, {cd(0)})), ConditionDViolation);
    auto sys = truncate_okubo(f.okubo(x, f.shifted));
    sys.Gamma[0] *= 2.0;
    CHECK_THROWS_AS(validate_conditions(sys), ConditionDViolation);
}

TEST_CASE("convolution with lambda = -lambda_3 recovers the okubo system") {
    Fixture f;
    std::vector<cd> x{cd(1), cd(0.5), cd(0.2)};
    auto orig = f.okubo(x, f.lam);
    auto sys = truncate_okubo(f.okubo(x, f.shifted));
    auto res = middle_convolution(sys, -f.lam.back());
    for (int i = 0; i < 3; ++i) CHECK(std::abs(res.Ginf(i, i) - f.lam[i]) < 1e-12);
    CHECK((res.P * res.Pinv - CMat::Identity(3, 3)).norm() < 1e-10);
    auto tr = sorted(res.traces());
    auto r0 = sorted(orig.r);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(tr[i] - r0[i]) < 1e-8);
    CMat sum = res.Ginf;
    for (const auto& G : res.residues) {
        sum += G;
        Eigen::JacobiSVD<CMat> svd(G);
        CHECK(svd.singularValues()(1) < 1e-9 * svd.singularValues()(0));
    }
    CHECK(sum.norm() < 1e-10);
    // the residues agree with the original up to the diagonal gauge on the last component
    for (int j = 0; j < 3; ++j) {
        CHECK((res.residues[j].topLeftCorner(2, 2) - orig.residues[j].topLeftCorner(2, 2)).norm() < 1e-9);
        CHECK(std::abs(res.residues[j](2, 2) - orig.residues[j](2, 2)) < 1e-9);
        CHECK(std::abs(res.residues[j](0, 2) * res.residues[j](2, 0) -
                       orig.residues[j](0, 2) * orig.residues[j](2, 0)) < 1e-9);
    }
}

TEST_CASE("generic lambda") {
    Fixture f;
    std::vector<cd> x{cd(1), cd(0.5), cd(0.2)};
    auto sys = truncate_okubo(f.okubo(x, f.shifted));
    cd lam(0.31, 0.17);
    auto res = middle_convolution(sys, lam);
    CHECK(std::abs(res.Ginf(0, 0) - (sys.lambda[0] - lam)) < 1e-12);
    CHECK(std::abs(res.Ginf(1, 1) - (sys.lambda[1] - lam)) < 1e-12);
    CHECK(std::abs(res.Ginf(2, 2) + lam) < 1e-12);
    CMat sum = res.Ginf;
    for (const auto& G : res.residues) sum += G;
    CHECK(sum.norm() < 1e-10);
    CHECK(res.pivot == 0);
    CHECK_THROWS_AS(middle_convolution(sys, sys.lambda[0]), ResonantLambda);
    CHECK_THROWS_AS(middle_convolution(sys, 0), ResonantLambda);
    auto bad = sys;
    bad.A.col(0)(1) = 0;
    bad.A.col(1)(2) = 0;
    CHECK_THROWS_AS(middle_convolution(bad, lam), PivotColumnNotFound);
}

TEST_CASE("convolved residues satisfy the schlesinger system") {
    Fixture f;
    cd lam(0.31, 0.17);
    double h = 1e-3;
    std::vector<cd> x0{cd(1), cd(0.5), cd(0.2)};
    auto samp = f.sampler(x0);
    auto run = [&](std::array<int, 2> gauge) {
        std::vector<ConvolutionResult> out;
        for (int q = -2; q <= 2; ++q) out.push_back(middle_convolution(samp({cd(1), cd(0.5 + q * h), cd(0.2)}), lam, gauge));
        return out;
    };
    auto snaps = run(middle_convolution(samp(x0), lam).gauge);
    CHECK(convolution_schlesinger_residual(snaps, h) < 1e-8);
    // another gauge pair only moves the epsilon part
    auto other = run({1, 0});
    CHECK(convolution_schlesinger_residual(other, h) < 1e-8);
    snaps[3].residues[0] *= 1.01;
    CHECK(convolution_schlesinger_residual(snaps, h) > 1e-3);
}

TEST_CASE("invariant subspaces of the convolution system") {
    Fixture f;
    std::vector<std::vector<cd>> xs{{cd(1), cd(0.5), cd(0.2)}, {cd(1), cd(0.4), cd(0)}, {cd(0.8), cd(0.6, 0.1), cd(0.1)}};
    for (const auto& x : xs) {
        auto samp = f.sampler(x);
        auto s0 = samp(x);
        std::vector<cd> zs{s0.z[0] + cd(0.3, 0.2), s0.z[1] + cd(-0.2, 0.4), cd(2.5, -1)};
        auto rep = invariant_subspace_check(samp, x, cd(0.31, 0.17), zs);
        CHECK(rep.dim_K == 3);
        CHECK(rep.dim_L == 0);
        CHECK_MESSAGE(rep.max_defect() < 1e-6, "defect " << rep.max_defect());
        // lambda = lambda_1 makes L nontrivial
        auto res = invariant_subspace_check(samp, x, s0.lambda[0], zs);
        CHECK(res.dim_L > 0);
        CHECK(res.max_defect() < 1e-6);
    }
}

TEST_CASE("two singular points have no K") {
    // rank one system with n = 2: Gamma_j are 1x1
    RankOneSystem s;
    s.n = 2;
    s.z = {cd(0), cd(1)};
    s.dz = {{cd(0)}, {cd(1)}};
    s.lambda = {cd(0.4)};
    s.B = CMat(1, 2);
    s.B << 1, 1;
    s.A = CMat(2, 1);
    s.A << 0.25, 0.75;
    for (int j = 0; j < 2; ++j) s.Gamma.push_back(-s.B.col(j) * s.A.row(j) * s.Gamma_inf());
    CHECK_NOTHROW(validate_conditions(s));
    RankOneSampler samp = [s](const std::vector<cd>& x) {
        auto t = s;
        t.z[1] = x[0];
        return t;
    };
    auto rep = invariant_subspace_check(samp, {cd(1)}, cd(0.2), {cd(0.5, 0.5)});
    CHECK(rep.dim_K == 0);
    CHECK(rep.dim_L == 0);
    auto res = middle_convolution(s, cd(0.2));
    CHECK((res.P * res.Pinv - CMat::Identity(2, 2)).norm() < 1e-12);
}
