#include "flatstruct/logvf.hpp"

namespace flatstruct {

namespace {

void require_tn_free_relation(const Ring& r) {
    if (r.has_extension() && r.relation().degree_in(r.n() - 1) > 0)
        throw SchemaError("division in t_n needs a relation free of t_n");
}

}  // namespace

int degree_tn(const Elem& f) {
    if (f.is_zero()) return -1;
    return f.num().degree_in(f.ring()->n() - 1);
}

Elem coeff_tn(const Elem& f, int k) {
    const RingPtr& r = f.ring();
    require_tn_free_relation(*r);
    return Elem(r, f.num().coeff_in(r->n() - 1, k), f.z_den(), f.r_den());
}

DivisorData make_divisor(const Elem& h, int n) {
    int deg = degree_tn(h);
    if (deg != n || !coeff_tn(h, n).equals(Elem::constant(h.ring(), 1)))
        throw NotMonic("h has degree " + std::to_string(deg) + " in t_n or a non-unit leading coefficient");
    return DivisorData{h, n};
}

DivisorData discriminant(const SaitoMatrices& m) {
    return make_divisor(determinant(scaled(m.T, Rational(-1))), m.n());
}

std::optional<Elem> divide_by_monic(const Elem& f, const DivisorData& d) {
    const RingPtr& r = d.h.ring();
    int tn = r->n() - 1;
    Elem rem = f;
    Elem q = Elem::constant(r, 0);
    std::vector<Elem> hc(d.n + 1);
    for (int k = 0; k <= d.n; ++k) hc[k] = coeff_tn(d.h, k);
    for (int deg = degree_tn(rem); deg >= d.n; deg = degree_tn(rem)) {
        Elem lead = coeff_tn(rem, deg);
        Elem mono = lead * Elem::var(r, tn).pow(deg - d.n);
        q += mono;
        rem -= mono * d.h;
        if (degree_tn(rem) >= deg) throw DivisionNotExact("division in t_n failed to reduce the degree");
    }
    if (!rem.is_zero()) return std::nullopt;
    return q;
}

Elem apply_field(const std::vector<Elem>& V, const Elem& f) {
    Elem acc = Elem::constant(f.ring(), 0);
    for (std::size_t j = 0; j < V.size(); ++j)
        if (!V[j].is_zero()) acc += V[j] * partial(f, static_cast<int>(j));
    return acc;
}

bool is_logarithmic(const std::vector<Elem>& V, const DivisorData& d) {
    return divide_by_monic(apply_field(V, d.h), d).has_value();
}

std::optional<Rational> saito_criterion(const VectorFieldMatrix& MV, const DivisorData& d) {
    for (std::size_t i = 0; i < MV.size(); ++i)
        if (!is_logarithmic(MV[i], d))
            throw RowNotLogarithmic("row " + std::to_string(i + 1) + " is not logarithmic");
    Elem det = determinant(MV);
    if (det.is_zero()) return std::nullopt;
    auto c = constant_value(coeff_tn(det, d.n));
    if (!c) return std::nullopt;
    Rational cv = *c;
    if (cv == 0 || !(det - d.h.scaled(cv)).is_zero()) return std::nullopt;
    return cv;
}

LogvfReport logvf_identities(const SaitoMatrices& m) {
    LogvfReport rep;
    const RingPtr& r = m.ring;
    int n = m.n();
    const auto& w = m.Binf;
    ElemMatrix M = scaled(m.T, Rational(-1));
    DivisorData d = discriminant(m);
    auto row = [&](int i) { return M[n - i]; };  // V_i, 1-based

    rep.euler_row = true;
    for (int j = 0; j < n; ++j)
        if (!M[n - 1][j].equals(Elem::var(r, j).scaled(w[j]))) rep.euler_row = false;

    rep.euler_scaling = apply_field(row(1), d.h).equals(d.h.scaled(n));

    Elem s1 = -coeff_tn(d.h, n - 1);
    rep.s1_relation = true;
    for (int i = 2; i <= n; ++i) {
        auto q = divide_by_monic(apply_field(row(i), d.h), d);
        if (!q || !q->equals(-partial(s1, n - i))) rep.s1_relation = false;
    }

    rep.weight_duality = true;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!is_homogeneous(M[i][j], 1 - w[i] + w[j])) rep.weight_duality = false;

    rep.trace_relation = true;
    for (int k = 0; k < n; ++k) {
        Elem tr = Elem::constant(r, 0);
        for (int i = 0; i < n; ++i) tr += m.Btilde[k][i][i];
        if (!apply_field(M[k], d.h).equals(tr * d.h)) rep.trace_relation = false;
    }

    if (!rep.euler_row) rep.failed.push_back("euler_row");
    if (!rep.euler_scaling) rep.failed.push_back("euler_scaling");
    if (!rep.s1_relation) rep.failed.push_back("s1_relation");
    if (!rep.weight_duality) rep.failed.push_back("weight_duality");
    if (!rep.trace_relation) rep.failed.push_back("trace_relation");
    return rep;
}

}  // namespace flatstruct
