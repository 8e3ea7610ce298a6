#pragma once

#include <random>

#include "flatstruct/ring.hpp"

namespace fst {

using namespace flatstruct;

inline Elem T(const RingPtr& r, int i) { return Elem::var(r, i); }
inline Elem Z(const RingPtr& r) { return Elem::var(r, r->zvar()); }
inline Elem K(const RingPtr& r, long num, long den = 1) {
    Rational q(num, den);
    q.canonicalize();
    return Elem::constant(r, q);
}

// H3' style ring: weights (3/5, 4/5, 1), w(z) = 1/5, t2 + t1 z + z^4 = 0.
inline RingPtr h3p_ring() {
    int nv = 4;
    Poly rel = Poly::variable(nv, 1) + Poly::variable(nv, 0) * Poly::variable(nv, 3) +
               Poly::variable(nv, 3, 4);
    return Ring::extension({Rational(3, 5), Rational(4, 5), Rational(1)}, "z", Rational(1, 5), rel);
}

inline RingPtr klein_ring() { return Ring::plain({Rational(2, 7), Rational(3, 7), Rational(1)}); }

// Small random polynomial (or fraction in an extension ring) with rational coefficients.
inline Elem random_elem(const RingPtr& r, std::mt19937_64& rng, int max_terms = 4, int max_deg = 3,
                        bool fractions = true) {
    std::uniform_int_distribution<int> nterm(0, max_terms);
    std::uniform_int_distribution<int> deg(0, max_deg);
    std::uniform_int_distribution<long> coef(-9, 9);
    std::uniform_int_distribution<long> den(1, 5);
    Poly p(r->nvars());
    int k = nterm(rng);
    for (int i = 0; i < k; ++i) {
        Monomial m(r->nvars(), 0);
        for (int v = 0; v < r->n(); ++v) m[v] = deg(rng) % (max_deg + 1 - v > 0 ? max_deg + 1 - v : 1);
        if (r->has_extension()) m[r->zvar()] = deg(rng);
        long c = coef(rng);
        if (c == 0) c = 1;
        p.add_term(m, Rational(c, den(rng)));
    }
    int a = 0, b = 0;
    if (fractions && r->has_extension()) {
        std::uniform_int_distribution<int> d01(0, 1);
        a = d01(rng);
        b = d01(rng);
    }
    return Elem(r, p, a, b);
}

inline std::vector<cd> random_point(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(0.3, 1.2);
    std::vector<cd> t;
    for (int i = 0; i < n; ++i) t.emplace_back(u(rng), 0.5 * u(rng) - 0.3);
    return t;
}

}  // namespace fst
