#include "flatstruct/ring.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>

namespace flatstruct {

bool MonomialOrder::operator()(const Monomial& a, const Monomial& b) const {
    int da = std::accumulate(a.begin(), a.end(), 0);
    int db = std::accumulate(b.begin(), b.end(), 0);
    if (da != db) return da < db;
    if (a.back() != b.back()) return a.back() < b.back();
    for (std::size_t i = 0; i + 1 < a.size(); ++i)
        if (a[i] != b[i]) return a[i] < b[i];
    return false;
}

std::string to_string(const Rational& q) { return q.get_str(); }

// ---------------------------------------------------------------- Poly

Poly Poly::constant(int nvars, const Rational& c) {
    Poly p(nvars);
    p.add_term(Monomial(nvars, 0), c);
    return p;
}

Poly Poly::variable(int nvars, int var, int power) {
    Poly p(nvars);
    Monomial m(nvars, 0);
    m[var] = power;
    p.add_term(m, 1);
    return p;
}

bool Poly::is_constant() const {
    if (terms_.empty()) return true;
    if (terms_.size() > 1) return false;
    const auto& m = terms_.begin()->first;
    return std::all_of(m.begin(), m.end(), [](int e) { return e == 0; });
}

Rational Poly::constant_term() const {
    auto it = terms_.find(Monomial(nvars_, 0));
    return it == terms_.end() ? Rational(0) : it->second;
}

void Poly::add_term(const Monomial& m, const Rational& c) {
    // GMP arithmetic assumes canonical operands
    Rational q = c;
    q.canonicalize();
    if (q == 0) return;
    auto [it, inserted] = terms_.try_emplace(m, q);
    if (!inserted) {
        it->second += q;
        if (it->second == 0) terms_.erase(it);
    }
}

Poly& Poly::operator+=(const Poly& o) {
    if (nvars_ == 0) nvars_ = o.nvars_;
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

Poly Poly::operator+(const Poly& o) const {
    Poly r = *this;
    r += o;
    return r;
}

Poly Poly::operator-() const {
    Poly r(nvars_);
    for (const auto& [m, c] : terms_) r.terms_.emplace_hint(r.terms_.end(), m, -c);
    return r;
}

Poly Poly::operator-(const Poly& o) const {
    Poly r = *this;
    if (r.nvars_ == 0) r.nvars_ = o.nvars_;
    for (const auto& [m, c] : o.terms_) r.add_term(m, -c);
    return r;
}

Poly Poly::operator*(const Poly& o) const {
    Poly r(std::max(nvars_, o.nvars_));
    if (is_zero() || o.is_zero()) return r;
    Monomial m(r.nvars_);
    Rational c;
    for (const auto& [ma, ca] : terms_) {
        for (const auto& [mb, cb] : o.terms_) {
            for (int i = 0; i < r.nvars_; ++i) m[i] = ma[i] + mb[i];
            c = ca * cb;
            r.add_term(m, c);
        }
    }
    return r;
}

Poly Poly::scaled(const Rational& c) const {
    Poly r(nvars_);
    if (c == 0) return r;
    for (const auto& [m, v] : terms_) r.terms_.emplace_hint(r.terms_.end(), m, v * c);
    return r;
}

Poly Poly::diff(int var) const {
    Poly r(nvars_);
    for (const auto& [m, c] : terms_) {
        if (m[var] == 0) continue;
        Monomial d = m;
        d[var] -= 1;
        r.add_term(d, c * m[var]);
    }
    return r;
}

int Poly::degree_in(int var) const {
    int d = -1;
    for (const auto& [m, c] : terms_) d = std::max(d, m[var]);
    return d;
}

int Poly::min_degree_in(int var) const {
    int d = std::numeric_limits<int>::max();
    for (const auto& [m, c] : terms_) d = std::min(d, m[var]);
    return terms_.empty() ? 0 : d;
}

Poly Poly::coeff_in(int var, int k) const {
    Poly r(nvars_);
    for (const auto& [m, c] : terms_) {
        if (m[var] != k) continue;
        Monomial d = m;
        d[var] = 0;
        r.add_term(d, c);
    }
    return r;
}

Poly Poly::shifted(int var, int k) const {
    Poly r(nvars_);
    for (const auto& [m, c] : terms_) {
        Monomial d = m;
        d[var] += k;
        if (d[var] < 0) throw DivisionNotExact("monomial shift below zero");
        r.add_term(d, c);
    }
    return r;
}

std::optional<Rational> Poly::homogeneous_weight(const std::vector<Rational>& w) const {
    std::optional<Rational> out;
    for (const auto& [m, c] : terms_) {
        Rational s = 0;
        for (int i = 0; i < nvars_; ++i)
            if (m[i]) s += w[i] * m[i];
        if (!out) out = s;
        else if (*out != s) return std::nullopt;
    }
    return out;
}

// ---------------------------------------------------------------- Ring

namespace {

cd eval_poly(const Poly& p, const std::vector<cd>& t, cd z) {
    cd s = 0;
    for (const auto& [m, c] : p.terms()) {
        cd term = c.get_d();
        for (std::size_t i = 0; i < t.size(); ++i)
            for (int k = 0; k < m[i]; ++k) term *= t[i];
        for (int k = 0; k < m.back(); ++k) term *= z;
        s += term;
    }
    return s;
}

}  // namespace

RingPtr Ring::plain(std::vector<Rational> weights) {
    std::shared_ptr<Ring> r(new Ring());
    r->n_ = static_cast<int>(weights.size());
    r->weights_ = std::move(weights);
    r->all_weights_ = r->weights_;
    r->all_weights_.push_back(0);
    return r;
}

RingPtr Ring::extension(std::vector<Rational> weights, std::string gen, Rational z_weight,
                        const Poly& relation) {
    std::shared_ptr<Ring> r(new Ring());
    r->n_ = static_cast<int>(weights.size());
    r->weights_ = std::move(weights);
    r->all_weights_ = r->weights_;
    r->all_weights_.push_back(z_weight);
    r->has_ext_ = true;
    r->gen_ = std::move(gen);
    int zv = r->n_;
    if (relation.nvars() != r->nvars()) throw SchemaError("relation arity mismatch");
    r->zdeg_ = relation.degree_in(zv);
    if (r->zdeg_ < 1) throw SchemaError("relation does not involve the generator");
    Poly lead = relation.coeff_in(zv, r->zdeg_);
    if (!lead.is_constant()) throw SchemaError("leading coefficient of the relation is not rational");
    r->lc_ = lead.constant_term();
    auto w = relation.homogeneous_weight(r->all_weights_);
    if (!w) throw SchemaError("relation is not weighted homogeneous");
    for (int k = 0; k < r->zdeg_; ++k) r->lower_.push_back(relation.coeff_in(zv, k));
    if (r->lower_[0].is_zero()) throw DivisionNotExact("generator divides the relation");
    r->rel_ = relation;
    r->R_ = relation.diff(zv);
    r->R_weight_ = *w - z_weight;
    for (int i = 0; i < r->n_; ++i) r->rel_t_.push_back(relation.diff(i));
    // Squarefreeness at a fixed generic point: a repeated root makes R a zero divisor.
    std::vector<cd> probe;
    for (int i = 0; i < r->n_; ++i) probe.emplace_back(0.731 + 0.173 * i, 0.291 - 0.117 * i);
    auto roots = relation_roots(*r, probe);
    for (std::size_t i = 0; i < roots.size(); ++i)
        for (std::size_t j = i + 1; j < roots.size(); ++j)
            if (std::abs(roots[i] - roots[j]) < 1e-8)
                throw DivisionNotExact("relation has a repeated root; d rel/dz is a zero divisor");
    return r;
}

std::string Ring::var_name(int var) const {
    if (var == n_) return gen_;
    return "t" + std::to_string(var + 1);
}

bool Ring::same_as(const Ring& o) const {
    return n_ == o.n_ && weights_ == o.weights_ && has_ext_ == o.has_ext_ &&
           (!has_ext_ || (rel_ == o.rel_ && gen_ == o.gen_ && z_weight() == o.z_weight()));
}

Poly Ring::reduce(const Poly& p) const {
    if (!has_ext_) return p;
    int zv = n_;
    int top = p.degree_in(zv);
    if (top < zdeg_) return p;
    std::vector<Poly> by(top + 1, Poly(nvars()));
    for (const auto& [m, c] : p.terms()) {
        Monomial d = m;
        d[zv] = 0;
        by[m[zv]].add_term(d, c);
    }
    Rational inv = 1 / lc_;
    for (int e = top; e >= zdeg_; --e) {
        if (by[e].is_zero()) continue;
        Poly c = by[e].scaled(-inv);
        by[e] = Poly(nvars());
        for (int k = 0; k < zdeg_; ++k)
            if (!lower_[k].is_zero()) by[e - zdeg_ + k] += c * lower_[k];
    }
    Poly out(nvars());
    for (int e = 0; e < zdeg_ && e <= top; ++e)
        for (const auto& [m, c] : by[e].terms()) {
            Monomial d = m;
            d[zv] = e;
            out.add_term(d, c);
        }
    return out;
}

Poly Ring::atom_power(int a, int b) const {
    {
        std::lock_guard<std::mutex> lock(cache_mu_);
        auto it = power_cache_.find({a, b});
        if (it != power_cache_.end()) return it->second;
    }
    Poly out;
    if (a == 0 && b == 0) out = Poly::constant(nvars(), 1);
    else if (b > 0) out = reduce(atom_power(a, b - 1) * R_);
    else out = reduce(atom_power(a - 1, 0).shifted(n_, 1));
    std::lock_guard<std::mutex> lock(cache_mu_);
    power_cache_.emplace(std::make_pair(a, b), out);
    return out;
}

std::optional<std::tuple<Rational, int, int>> Ring::match_atom_monomial(const Poly& p0) const {
    Poly p = reduce(p0);
    if (p.is_zero()) return std::nullopt;
    if (p.is_constant()) return std::make_tuple(p.constant_term(), 0, 0);
    if (!has_ext_) return std::nullopt;
    auto w = p.homogeneous_weight(all_weights_);
    if (!w) return std::nullopt;
    const Rational& wz = z_weight();
    for (int b = 0; b <= 12; ++b) {
        Rational rest = *w - R_weight_ * b;
        if (rest < 0) break;
        Rational aq = rest / wz;
        if (aq.get_den() != 1) continue;
        long a = aq.get_num().get_si();
        if (a > 4 * zdeg_ + 96) continue;
        Poly q = atom_power(static_cast<int>(a), b);
        if (q.size() != p.size()) continue;
        Rational c = p.terms().rbegin()->second / q.terms().rbegin()->second;
        if (p == q.scaled(c)) return std::make_tuple(c, static_cast<int>(a), b);
    }
    return std::nullopt;
}

// ---------------------------------------------------------------- Elem

Elem::Elem(RingPtr ring, Poly num, int z_den, int r_den)
    : ring_(std::move(ring)), num_(std::move(num)), za_(z_den), rb_(r_den) {
    if (!ring_) throw SchemaError("element without ring");
    if (num_.nvars() == 0) num_ = Poly(ring_->nvars());
    if (num_.nvars() != ring_->nvars()) throw SchemaError("polynomial arity does not match ring");
    if (!ring_->has_extension() && (za_ || rb_))
        throw DivisionNotExact("denominators require an extension ring");
    num_ = ring_->reduce(num_);
    canonicalize();
}

void Elem::canonicalize() {
    if (num_.is_zero()) {
        za_ = rb_ = 0;
        return;
    }
    if (za_ > 0) {
        int k = std::min(za_, num_.min_degree_in(ring_->zvar()));
        if (k > 0) {
            num_ = num_.shifted(ring_->zvar(), -k);
            za_ -= k;
        }
    }
}

Elem Elem::constant(RingPtr ring, const Rational& c) {
    int nv = ring->nvars();
    return Elem(std::move(ring), Poly::constant(nv, c));
}

Elem Elem::var(RingPtr ring, int v) {
    int nv = ring->nvars();
    return Elem(std::move(ring), Poly::variable(nv, v));
}

namespace {

const RingPtr& pick_ring(const Elem& a, const Elem& b) {
    if (a.ring() && b.ring() && a.ring() != b.ring() && !a.ring()->same_as(*b.ring()))
        throw SchemaError("mixing elements of different rings");
    return a.ring() ? a.ring() : b.ring();
}

}  // namespace

Elem Elem::operator+(const Elem& o) const {
    if (!o.ring_ || o.is_zero()) return ring_ ? *this : o;
    if (!ring_ || is_zero()) return o;
    const RingPtr& r = pick_ring(*this, o);
    int A = std::max(za_, o.za_), B = std::max(rb_, o.rb_);
    Poly x = (A == za_ && B == rb_) ? num_ : r->reduce(num_ * r->atom_power(A - za_, B - rb_));
    Poly y = (A == o.za_ && B == o.rb_) ? o.num_
                                        : r->reduce(o.num_ * r->atom_power(A - o.za_, B - o.rb_));
    return Elem(r, x + y, A, B);
}

Elem Elem::operator-() const {
    if (!ring_) return *this;
    Elem r = *this;
    r.num_ = -num_;
    return r;
}

Elem Elem::operator-(const Elem& o) const { return *this + (-o); }

Elem Elem::operator*(const Elem& o) const {
    if (!ring_ || !o.ring_) return ring_ ? Elem::constant(ring_, 0) : (o.ring_ ? Elem::constant(o.ring_, 0) : Elem());
    const RingPtr& r = pick_ring(*this, o);
    if (is_zero() || o.is_zero()) return Elem::constant(r, 0);
    return Elem(r, num_ * o.num_, za_ + o.za_, rb_ + o.rb_);
}

Elem Elem::scaled(const Rational& c) const {
    if (!ring_) return *this;
    return Elem(ring_, num_.scaled(c), za_, rb_);
}

Elem Elem::pow(unsigned e) const {
    Elem result = Elem::constant(ring_, 1);
    Elem base = *this;
    while (e) {
        if (e & 1u) result = result * base;
        e >>= 1u;
        if (e) base = base * base;
    }
    return result;
}

Elem Elem::divided_by(const Elem& d) const {
    const RingPtr& r = pick_ring(*this, d);
    if (!r) throw DivisionNotExact("division of unbound elements");
    auto m = r->match_atom_monomial(d.num());
    if (!m) throw DivisionNotExact("divisor is not a constant times a product of z and d rel/dz");
    auto [c, a, b] = *m;
    if (!r->has_extension() && (a || b)) throw DivisionNotExact("non-constant divisor");
    Poly top = num_;
    if (d.za_ || d.rb_) top = r->reduce(top * r->atom_power(d.za_, d.rb_));
    return Elem(r, top.scaled(1 / c), za_ + a, rb_ + b);
}

std::optional<Rational> Elem::homogeneous_weight() const {
    if (!ring_) return std::nullopt;
    auto w = num_.homogeneous_weight(ring_->all_weights());
    if (!w) return std::nullopt;
    return *w - ring_->z_weight() * za_ - ring_->rel_z_weight() * rb_;
}

namespace {

// Total derivative of a polynomial in (t, z) along t_var, as an element.
Elem total_diff(const RingPtr& r, const Poly& p, int var) {
    Poly pt = p.diff(var);
    if (!r->has_extension() || p.degree_in(r->zvar()) <= 0) return Elem(r, pt);
    Poly pz = p.diff(r->zvar());
    return Elem(r, pt * r->rel_z() - pz * r->rel_t(var), 0, 1);
}

}  // namespace

Elem partial(const Elem& f, int var) {
    const RingPtr& r = f.ring();
    if (!r) return f;
    if (var < 0 || var >= r->n()) throw SchemaError("partial: variable index out of range");
    if (!r->has_extension()) return Elem(r, f.num().diff(var));
    int a = f.z_den(), b = f.r_den();
    Elem dn = total_diff(r, f.num(), var);
    Elem out(r, dn.num(), dn.z_den() + a, dn.r_den() + b);
    if (a > 0) {
        // -a N z^{-a-1} R^{-b} dz with dz = -rel_t / R
        out += Elem(r, f.num() * r->rel_t(var), a + 1, b + 1).scaled(a);
    }
    if (b > 0) {
        Elem dR = total_diff(r, r->rel_z(), var);
        out -= Elem(r, f.num() * dR.num(), a, b + 1 + dR.r_den()).scaled(b);
    }
    return out;
}

Elem euler_apply(const Elem& f) {
    const RingPtr& r = f.ring();
    if (!r) return f;
    Elem out = Elem::constant(r, 0);
    for (int i = 0; i < r->n(); ++i) {
        Elem d = partial(f, i);
        if (d.is_zero()) continue;
        out += (Elem::var(r, i) * d).scaled(r->weights()[i]);
    }
    return out;
}

bool is_homogeneous(const Elem& f, const Rational& w) {
    if (!f.ring() || f.is_zero()) return true;
    return (euler_apply(f) - f.scaled(w)).is_zero();
}

std::optional<Rational> constant_value(const Elem& f) {
    if (!f.ring() || f.is_zero()) return Rational(0);
    if (f.is_polynomial()) {
        if (f.num().is_constant()) return f.num().constant_term();
        return std::nullopt;
    }
    Poly den = f.ring()->atom_power(f.z_den(), f.r_den());
    Rational c = f.num().terms().rbegin()->second / den.terms().rbegin()->second;
    if (f.num() == den.scaled(c)) return c;
    return std::nullopt;
}

// ---------------------------------------------------------------- numerics

std::vector<cd> relation_roots(const Ring& ring, const std::vector<cd>& t) {
    int d = ring.z_degree();
    if (d == 0) return {};
    std::vector<cd> c(d + 1);
    int zv = ring.zvar();
    for (const auto& [m, q] : ring.relation().terms()) {
        cd term = q.get_d();
        for (int i = 0; i < ring.n(); ++i)
            for (int k = 0; k < m[i]; ++k) term *= t[i];
        c[m[zv]] += term;
    }
    if (d == 1) return {-c[0] / c[1]};
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) comp(i, d - 1) = -c[i] / c[d];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    std::vector<cd> out(d);
    for (int i = 0; i < d; ++i) out[i] = es.eigenvalues()[i];
    return out;
}

namespace {

cd newton_polish(const Ring& ring, const std::vector<cd>& t, cd z, bool& ok) {
    ok = false;
    for (int it = 0; it < 100; ++it) {
        cd f = eval_poly(ring.relation(), t, z);
        cd fp = eval_poly(ring.rel_z(), t, z);
        if (fp == cd(0)) return z;
        cd dz = f / fp;
        z -= dz;
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return z;
        if (std::abs(dz) <= 1e-15 * (1 + std::abs(z))) {
            ok = true;
            return z;
        }
    }
    cd f = eval_poly(ring.relation(), t, z);
    cd fp = eval_poly(ring.rel_z(), t, z);
    ok = std::abs(f) <= 1e-12 * (1 + std::abs(fp) * (1 + std::abs(z)));
    return z;
}

double nearest_other(const std::vector<cd>& roots, cd z) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < roots.size(); ++i)
        if (std::abs(roots[i] - z) < std::abs(roots[best] - z)) best = i;
    double sep = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < roots.size(); ++i)
        if (i != best) sep = std::min(sep, std::abs(roots[i] - roots[best]));
    return sep;
}

}  // namespace

cd solve_root(const Ring& ring, const std::vector<cd>& t, cd seed, double separation) {
    if (!ring.has_extension()) return seed;
    bool ok = false;
    cd z = newton_polish(ring, t, seed, ok);
    auto roots = relation_roots(ring, t);
    bool collide = nearest_other(roots, z) < separation;
    if (!ok && !collide) throw RootNotConverged("Newton iteration on the relation did not converge");
    if (collide)
        throw RootCollision("two roots of the relation are closer than the separation threshold");
    return z;
}

cd eval(const Elem& f, const std::vector<cd>& t, cd root_seed, double separation) {
    if (!f.ring()) return 0;
    cd z = 0;
    if (f.ring()->has_extension()) z = solve_root(*f.ring(), t, root_seed, separation);
    Evaluator ev(f.ring(), {f});
    return ev(t, z)[0];
}

Evaluator::Evaluator(RingPtr ring, const std::vector<Elem>& elems) : ring_(std::move(ring)) {
    maxdeg_.assign(ring_->nvars(), 0);
    auto compile = [&](const Poly& p, int za, int rb) {
        Compiled c;
        c.za = za;
        c.rb = rb;
        for (const auto& [m, q] : p.terms()) {
            c.terms.emplace_back(cd(q.get_d()), m);
            for (int i = 0; i < ring_->nvars(); ++i) maxdeg_[i] = std::max(maxdeg_[i], m[i]);
        }
        return c;
    };
    for (const auto& e : elems) items_.push_back(compile(e.num(), e.z_den(), e.r_den()));
    if (ring_->has_extension()) rz_ = compile(ring_->rel_z(), 0, 0);
}

std::vector<cd> Evaluator::operator()(const std::vector<cd>& t, cd z) const {
    int nv = ring_->nvars();
    std::vector<std::vector<cd>> pw(nv);
    for (int i = 0; i < nv; ++i) {
        cd x = i < ring_->n() ? t[i] : z;
        pw[i].resize(maxdeg_[i] + 1);
        pw[i][0] = 1;
        for (int k = 1; k <= maxdeg_[i]; ++k) pw[i][k] = pw[i][k - 1] * x;
    }
    auto run = [&](const Compiled& c) {
        cd s = 0;
        for (const auto& [q, m] : c.terms) {
            cd term = q;
            for (int i = 0; i < nv; ++i)
                if (m[i]) term *= pw[i][m[i]];
            s += term;
        }
        return s;
    };
    cd rval = ring_->has_extension() ? run(rz_) : cd(1);
    std::vector<cd> out;
    out.reserve(items_.size());
    for (const auto& c : items_) {
        cd v = run(c);
        for (int k = 0; k < c.za; ++k) v /= z;
        for (int k = 0; k < c.rb; ++k) v /= rval;
        out.push_back(v);
    }
    return out;
}

RootTracker::RootTracker(RingPtr ring, std::vector<cd> t0, cd seed, double separation)
    : ring_(std::move(ring)), t_(std::move(t0)), sep_(separation) {
    z_ = solve_root(*ring_, t_, seed, sep_);
}

double RootTracker::separation() const {
    if (!ring_->has_extension()) return std::numeric_limits<double>::infinity();
    return nearest_other(relation_roots(*ring_, t_), z_);
}

cd RootTracker::move_to(const std::vector<cd>& target) {
    if (!ring_->has_extension()) {
        t_ = target;
        return z_;
    }
    double s = 0, h = 1;
    std::vector<cd> cur = t_;
    while (s < 1) {
        double s1 = std::min(1.0, s + h);
        std::vector<cd> tp(cur.size());
        for (std::size_t i = 0; i < cur.size(); ++i) tp[i] = t_[i] + s1 * (target[i] - t_[i]);
        auto roots = relation_roots(*ring_, tp);
        std::vector<double> dist(roots.size());
        for (std::size_t i = 0; i < roots.size(); ++i) dist[i] = std::abs(roots[i] - z_);
        std::size_t best = std::min_element(dist.begin(), dist.end()) - dist.begin();
        double second = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < roots.size(); ++i)
            if (i != best) second = std::min(second, dist[i]);
        if (second > 3 * dist[best]) {
            bool ok = false;
            cd z = newton_polish(*ring_, tp, roots[best], ok);
            if (ok) {
                z_ = z;
                s = s1;
                cur = tp;
                h = std::min(2 * h, 1.0);
                continue;
            }
        }
        h /= 2;
        if (h < 1e-10) throw RootNotConverged("root continuation step underflow");
    }
    t_ = target;
    if (separation() < sep_)
        throw RootCollision("tracked root collides with another root of the relation");
    return z_;
}

}  // namespace flatstruct
