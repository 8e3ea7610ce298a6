#include "flatstruct/flatcore.hpp"

#include <future>
#include <sstream>

namespace flatstruct {

bool WdvvReport::commutators_vanish() const {
    for (const auto& [pq, d] : commutators)
        if (!is_zero(d)) return false;
    return true;
}

bool WdvvReport::passed() const {
    return unit_ok && homogeneity_ok && saito_relations_ok && flat_normalization_ok &&
           commutators_vanish();
}

SaitoMatrices build_saito_matrices(const PotentialVF& pvf) {
    const RingPtr& r = pvf.ring;
    int n = pvf.n();
    if (static_cast<int>(pvf.g.size()) != n)
        throw SchemaError("potential vector field has " + std::to_string(pvf.g.size()) +
                          " components for rank " + std::to_string(n));
    const auto& w = pvf.weights();

    SaitoMatrices m;
    m.ring = r;
    m.Binf = w;
    m.C = zero_matrix(r, n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.C[i][j] = partial(pvf.g[j], i);

    m.Btilde.reserve(n);
    for (int k = 0; k < n; ++k) m.Btilde.push_back(partial(m.C, k));

    m.T = zero_matrix(r, n, n);
    for (int k = 0; k < n; ++k) {
        Elem coef = Elem::var(r, k).scaled(-w[k]);
        m.T = m.T + scaled(m.Btilde[k], coef);
    }

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Elem& e = m.T[i][j];
            if (e.is_zero()) continue;
            Rational expect = 1 + w[j] - w[i];
            if (!is_homogeneous(e, expect)) {
                std::ostringstream os;
                os << "T_" << i + 1 << j + 1 << " is not homogeneous of weight " << to_string(expect);
                throw SchemaError(os.str());
            }
        }
    return m;
}

namespace {

bool unit_holds(const SaitoMatrices& m) {
    return equals(m.Btilde[m.n() - 1], identity_matrix(m.ring, m.n()));
}

bool homogeneity_holds(const PotentialVF& pvf) {
    const auto& w = pvf.weights();
    for (int j = 0; j < pvf.n(); ++j)
        if (!is_homogeneous(pvf.g[j], 1 + w[j])) return false;
    return true;
}

}  // namespace

WdvvReport check_extended_wdvv(const PotentialVF& pvf) {
    WdvvReport rep;
    rep.homogeneity_ok = homogeneity_holds(pvf);
    SaitoMatrices m = build_saito_matrices(pvf);
    rep.unit_ok = unit_holds(m);

    int n = m.n();
    std::vector<std::pair<int, int>> pairs;
    for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q) pairs.emplace_back(p, q);
    std::vector<std::future<ElemMatrix>> jobs;
    for (auto [p, q] : pairs)
        jobs.push_back(std::async(std::launch::async, [&m, p = p, q = q] {
            return commutator(m.Btilde[p], m.Btilde[q]);
        }));
    for (std::size_t k = 0; k < pairs.size(); ++k) rep.commutators[pairs[k]] = jobs[k].get();

    rep.saito_relations_ok = check_saito_relations(m);
    rep.flat_normalization_ok = check_flat_normalization(m);
    return rep;
}

bool check_saito_relations(const SaitoMatrices& m) {
    int n = m.n();
    const RingPtr& r = m.ring;
    ElemMatrix binf = diagonal_matrix(r, m.Binf);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (!equals(partial(m.Btilde[i], j), partial(m.Btilde[j], i))) return false;
            if (!is_zero(commutator(m.Btilde[i], m.Btilde[j]))) return false;
        }
        if (!is_zero(commutator(m.T, m.Btilde[i]))) return false;
        ElemMatrix rel = partial(m.T, i) + m.Btilde[i] + commutator(m.Btilde[i], binf);
        if (!is_zero(rel)) return false;
    }
    return true;
}

bool check_flat_normalization(const SaitoMatrices& m) {
    int n = m.n();
    for (int j = 0; j < n; ++j) {
        Elem d = m.T[n - 1][j] + Elem::var(m.ring, j).scaled(m.Binf[j]);
        if (!d.is_zero()) return false;
    }
    return true;
}

PotentialVF pvf_from_prepotential(const std::string& name, const Elem& F) {
    PotentialVF p;
    p.name = name;
    p.ring = F.ring();
    int n = p.ring->n();
    for (int j = 0; j < n; ++j) p.g.push_back(partial(F, n - 1 - j));
    return p;
}

PotentialVF rescale(const PotentialVF& pvf, const std::vector<Rational>& c) {
    int n = pvf.n();
    const RingPtr& r = pvf.ring;
    if (r->has_extension())
        for (int i = 0; i < n; ++i)
            if (c[i] != 1) throw SchemaError("rescaling of extension-ring entries is not supported");
    PotentialVF out = pvf;
    for (int j = 0; j < n; ++j) {
        Poly acc(r->nvars());
        for (const auto& [mono, coef] : pvf.g[j].num().terms()) {
            Rational f = coef * c[j];
            for (int i = 0; i < n; ++i)
                for (int e = 0; e < mono[i]; ++e) f /= c[i];
            acc.add_term(mono, f);
        }
        out.g[j] = Elem(r, acc, pvf.g[j].z_den(), pvf.g[j].r_den());
    }
    return out;
}

namespace {

// kappa with a = kappa * b, both nonzero; absent when the ratio is not a constant.
std::optional<Rational> constant_ratio(const Elem& a, const Elem& b) {
    // a z^A R^B and b z^A R^B as reduced polynomials, which have a unique normal form
    const Ring& r = *a.ring();
    int za = std::max(a.z_den(), b.z_den()), rb = std::max(a.r_den(), b.r_den());
    Poly pa = r.reduce(a.num() * r.atom_power(za - a.z_den(), rb - a.r_den()));
    Poly pb = r.reduce(b.num() * r.atom_power(za - b.z_den(), rb - b.r_den()));
    if (pa.is_zero() || pb.is_zero()) return std::nullopt;
    Rational ka = pa.terms().rbegin()->second;
    Rational kb = pb.terms().rbegin()->second;
    Rational kappa = ka / kb;
    if ((a - b.scaled(kappa)).is_zero()) return kappa;
    return std::nullopt;
}

bool is_rational_square(const Rational& q, Rational& root) {
    if (q < 0) return false;
    mpz_class num = q.get_num(), den = q.get_den();
    if (!mpz_perfect_square_p(num.get_mpz_t()) || !mpz_perfect_square_p(den.get_mpz_t())) return false;
    mpz_class rn, rd;
    mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
    mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
    root = Rational(rn, rd);
    root.canonicalize();
    return true;
}

}  // namespace

std::optional<Prepotential> frobenius_check(const PotentialVF& pvf) {
    int n = pvf.n();
    const auto& w = pvf.weights();
    const RingPtr& r = pvf.ring;
    Rational pair = w[0] + w[n - 1];
    for (int i = 0; i < n; ++i)
        if (w[i] + w[n - 1 - i] != pair) return std::nullopt;
    Rational rr = -pair / 2;

    SaitoMatrices m = build_saito_matrices(pvf);

    // d_i = c_i c_{n+1-i} depends only on the pair class min(i, n+1-i).
    auto cls = [n](int i) { return std::min(i, n - 1 - i); };
    int ncls = (n + 1) / 2;
    std::vector<std::optional<Rational>> delta(ncls);
    std::vector<std::vector<std::pair<int, Rational>>> adj(ncls);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Elem& a = m.C[i][n - 1 - j];
            const Elem& b = m.C[j][n - 1 - i];
            if (a.is_zero() && b.is_zero()) continue;
            if (a.is_zero() || b.is_zero())
                throw NoRescalingFound("C_" + std::to_string(i + 1) + std::to_string(n - j) +
                                       " and its mirror entry disagree on vanishing");
            auto kappa = constant_ratio(a, b);
            if (!kappa)
                throw NoRescalingFound("non-constant ratio between C_" + std::to_string(i + 1) +
                                       std::to_string(n - j) + " and its mirror entry");
            // d_i / d_j = kappa
            adj[cls(j)].emplace_back(cls(i), *kappa);
            adj[cls(i)].emplace_back(cls(j), 1 / *kappa);
        }
    for (int root = 0; root < ncls; ++root) {
        if (delta[root]) continue;
        delta[root] = Rational(1);
        std::vector<int> stack{root};
        while (!stack.empty()) {
            int a = stack.back();
            stack.pop_back();
            for (const auto& [b, kappa] : adj[a]) {
                Rational v = *delta[a] * kappa;
                if (!delta[b]) {
                    delta[b] = v;
                    stack.push_back(b);
                } else if (*delta[b] != v) {
                    throw NoRescalingFound("inconsistent rescaling ratios");
                }
            }
        }
    }
    for (int k = 0; k < ncls; ++k)
        if (*delta[k] == 0) throw NoRescalingFound("zero rescaling ratio");

    std::vector<Rational> c(n, Rational(1));
    bool identity = true;
    for (int k = 0; k < ncls; ++k)
        if (*delta[k] != *delta[0]) identity = false;
    if (!identity) {
        // Overall scale s = d_1 = c_1 is free; pick it so the middle factor is rational.
        Rational s = 1;
        if (n % 2 == 1) {
            Rational dm = *delta[ncls - 1] / *delta[0];
            Rational root;
            if (!is_rational_square(dm, root)) s = dm;
        }
        c[0] = s;
        for (int i = 1; i < n - 1 - i; ++i) c[i] = s * *delta[i] / *delta[0];
        if (n % 2 == 1) {
            int mid = n / 2;
            Rational d = s * *delta[mid] / *delta[0];
            Rational root;
            if (!is_rational_square(d, root)) throw NoRescalingFound("middle rescaling is irrational");
            c[mid] = root;
        }
    }

    PotentialVF scaled_pvf = identity ? pvf : rescale(pvf, c);
    Rational weight = 1 - 2 * rr;
    if (weight == 0) throw NoRescalingFound("prepotential weight vanishes");
    Elem F = Elem::constant(r, 0);
    for (int i = 0; i < n; ++i)
        F += (Elem::var(r, i) * scaled_pvf.g[n - 1 - i]).scaled(w[i]);
    F = F.scaled(1 / weight);
    for (int i = 0; i < n; ++i)
        if (!partial(F, i).equals(scaled_pvf.g[n - 1 - i]))
            throw NoRescalingFound("integrated prepotential does not reproduce the vector field");
    return Prepotential{F, c, weight, rr};
}

FlatCoordinates flat_coords_from_okubo(const OkuboData& okubo,
                                       const std::vector<std::vector<cd>>& points, double tol) {
    const RingPtr& r = okubo.ring;
    int n = r->n();
    FlatCoordinates out;
    const auto& lam = okubo.lambda;
    for (int j = 0; j < n; ++j) {
        Rational s = lam[j] - lam[n - 1] + 1;
        if (s == 0) throw DegenerateJacobian("lambda_j - lambda_n + 1 vanishes for j = " + std::to_string(j + 1));
        out.t.push_back(okubo.T[n - 1][j].scaled(-1 / s));
    }
    ElemMatrix J = zero_matrix(r, n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) J[i][j] = partial(okubo.T[n - 1][j], i);
    out.jacobian = determinant(J);
    for (const auto& p : points) {
        cd v = out.jacobian.is_zero() ? cd(0) : eval(out.jacobian, p);
        out.jacobian_values.push_back(v);
        if (std::abs(v) <= tol) {
            std::ostringstream os;
            os << "jacobian vanishes at (";
            for (std::size_t k = 0; k < p.size(); ++k) os << (k ? ", " : "") << p[k].real();
            os << ")";
            throw DegenerateJacobian(os.str());
        }
    }
    return out;
}

}  // namespace flatstruct
