#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flatstruct/exprio.hpp"
#include "flatstruct/flatcore.hpp"
#include "support.hpp"

using namespace fst;

namespace {

const char* kKlein = R"({"name": "LT8", "weights": ["2/7", "3/7", "1"],
  "g": ["(-2*t1^3*t2 + t2^3 + 12*t1*t3)/12",
        "(2*t1^5 + 5*t1^2*t2^2 + 10*t2*t3)/10",
        "(-8*t1^7 + 21*t1^4*t2^2 + 7*t1*t2^4 + 28*t3^2)/56"]})";

const char* kH3 = R"({"name": "H3", "weights": ["1/5", "3/5", "1"],
  "g": ["t2^2/2 + t1*t3", "t2*t3 + t1^5*t2/10 + t1^2*t2^2/2",
        "t3^2/2 + t1^10/360 + t1^4*t2^2/4 + t1*t2^3/3"]})";

const char* kTwo = R"({"name": "n2", "weights": ["1/2", "1"],
  "g": ["t1*t2 + t1^3", "t2^2/2 + 3/4*t1^4"]})";

PotentialVF perturbed_klein() {
    auto p = parse_pvf(kKlein);
    p.g[2] = p.g[2] + T(p.ring, 0).pow(7);
    return p;
}

Rational eval_exact(const Elem& f, const std::vector<Rational>& t) {
    Rational acc = 0;
    for (const auto& [m, c] : f.num().terms()) {
        Rational term = c;
        for (std::size_t i = 0; i < t.size(); ++i)
            for (int e = 0; e < m[i]; ++e) term *= t[i];
        acc += term;
    }
    return acc;
}

}  // namespace

TEST_CASE("klein saito matrices") {
    auto p = parse_pvf(kKlein);
    auto m = build_saito_matrices(p);
    auto r = p.ring;
    for (int j = 0; j < 3; ++j) CHECK(m.C[2][j].equals(T(r, j)));
    CHECK(equals(m.Btilde[2], identity_matrix(r, 3)));
    Elem t11 = parse_expr("t1^2*t2/2 - t3", r);
    CHECK(m.T[0][0].equals(t11));
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> num(-40, 40), den(1, 9);
    for (int k = 0; k < 20; ++k) {
        std::vector<Rational> t;
        for (int i = 0; i < 3; ++i) {
            Rational q(num(rng), den(rng));
            q.canonicalize();
            t.push_back(q);
        }
        CHECK(eval_exact(m.T[0][0], t) == eval_exact(-partial(p.g[0], 0), t));
        CHECK(eval_exact(m.T[0][0], t) == t[0] * t[0] * t[1] / 2 - t[2]);
    }
    CHECK(check_flat_normalization(m));
    CHECK(check_saito_relations(m));
}

TEST_CASE("extended wdvv passes for klein, H3 and the rank two entry") {
    for (const char* doc : {kKlein, kH3, kTwo}) {
        auto rep = check_extended_wdvv(parse_pvf(doc));
        CHECK(rep.passed());
        CHECK(rep.commutators.size() == static_cast<std::size_t>(parse_pvf(doc).n() * (parse_pvf(doc).n() - 1) / 2));
    }
}

TEST_CASE("perturbed klein fails the commutator test") {
    auto p = perturbed_klein();
    auto rep = check_extended_wdvv(p);
    CHECK(rep.homogeneity_ok);
    CHECK(rep.unit_ok);
    CHECK_FALSE(rep.commutators_vanish());
    CHECK_FALSE(rep.saito_relations_ok);
    CHECK_FALSE(rep.passed());
    CHECK_FALSE(check_saito_relations(build_saito_matrices(p)));
    // Only the t1^7 term perturbs B~(1); B~(1)_{13} gains 42 t1^5, B~(2), B~(3) are unchanged.
    auto m0 = build_saito_matrices(parse_pvf(kKlein));
    auto m1 = build_saito_matrices(p);
    CHECK((m1.Btilde[0][0][2] - m0.Btilde[0][0][2]).equals(T(p.ring, 0).pow(5).scaled(42)));
    ElemMatrix expect = commutator(m1.Btilde[0], m1.Btilde[1]);
    CHECK(equals(rep.commutators.at({0, 1}), expect));
}

TEST_CASE("flat normalization detects a shifted entry") {
    auto m = build_saito_matrices(parse_pvf(kKlein));
    m.T[2][0] = m.T[2][0] + K(m.ring, 1);
    CHECK_FALSE(check_flat_normalization(m));
}

TEST_CASE("rescaling covariance") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> num(1, 9), sign(0, 1);
    for (const char* doc : {kKlein, kH3}) {
        auto p = parse_pvf(doc);
        for (int k = 0; k < 5; ++k) {
            std::vector<Rational> c;
            for (int i = 0; i < 2; ++i) {
                Rational q(num(rng) * (sign(rng) ? 1 : -1), num(rng));
                q.canonicalize();
                c.push_back(q);
            }
            c.push_back(1);
            CHECK(check_extended_wdvv(rescale(p, c)).passed());
        }
    }
}

TEST_CASE("frobenius check") {
    auto h3 = parse_pvf(kH3);
    auto F = frobenius_check(h3);
    REQUIRE(F);
    Elem expect = parse_expr("(t2^2*t3 + t1*t3^2)/2 + t1^11/3960 + t1^5*t2^2/20 + t1^2*t2^3/6", h3.ring);
    CHECK(F->F.equals(expect));
    CHECK(F->weight == Rational(11, 5));
    CHECK(F->r == Rational(-3, 5));
    CHECK(is_homogeneous(F->F, F->weight));

    CHECK_FALSE(frobenius_check(parse_pvf(kKlein)));

    // rank two: the pairing holds, but C J is never symmetric
    CHECK_THROWS_AS(frobenius_check(parse_pvf(kTwo)), NoRescalingFound);

    // a rescaled H3 is brought back to a potential
    std::vector<Rational> c{Rational(3), Rational(2, 7), Rational(1)};
    auto F2 = frobenius_check(rescale(h3, c));
    REQUIRE(F2);
    CHECK(is_homogeneous(F2->F, Rational(11, 5)));
    CHECK(F2->scaling != std::vector<Rational>{1, 1, 1});
    auto back = rescale(rescale(h3, c), F2->scaling);
    for (int i = 0; i < 3; ++i) CHECK(partial(F2->F, i).equals(back.g[2 - i]));

    // a middle ratio that is not a square
    std::vector<Rational> c3{Rational(1), Rational(2), Rational(1)};
    auto F3 = frobenius_check(rescale(h3, c3));
    REQUIRE(F3);
    auto back3 = rescale(rescale(h3, c3), F3->scaling);
    for (int i = 0; i < 3; ++i) CHECK(partial(F3->F, i).equals(back3.g[2 - i]));
}

TEST_CASE("flat coordinates from okubo data") {
    auto p = parse_pvf(kKlein);
    auto m = build_saito_matrices(p);
    std::vector<Rational> lam;
    for (auto w : m.Binf) lam.push_back(w - 1 + Rational(1, 3));
    auto fc = flat_coords_from_okubo({p.ring, m.T, lam}, {{0.3, -0.2, 1.1}, {2.0, 1.0, -0.5}});
    for (int j = 0; j < 3; ++j) CHECK(fc.t[j].equals(T(p.ring, j)));
    CHECK(fc.jacobian.equals(K(p.ring, -6, 49)));
    CHECK(fc.jacobian_values[1].real() == doctest::Approx(-6.0 / 49));

    ElemMatrix constant = zero_matrix(p.ring, 3, 3);
    constant[2][0] = K(p.ring, 2);
    CHECK_THROWS_AS(flat_coords_from_okubo({p.ring, constant, lam}, {{0.1, 0.2, 0.3}}), DegenerateJacobian);
}
