#pragma once

#include <gmpxx.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "flatstruct/errors.hpp"

namespace flatstruct {

using Rational = mpq_class;
using cd = std::complex<double>;

// Exponents of t_1..t_n followed by the exponent of the extension generator.
using Monomial = std::vector<int>;

// Graded lexicographic order: total degree first, then z, then t_1, t_2, ...
struct MonomialOrder {
    bool operator()(const Monomial& a, const Monomial& b) const;
};

class Poly {
public:
    using TermMap = std::map<Monomial, Rational, MonomialOrder>;

    Poly() = default;
    explicit Poly(int nvars) : nvars_(nvars) {}

    static Poly constant(int nvars, const Rational& c);
    static Poly variable(int nvars, int var, int power = 1);

    int nvars() const { return nvars_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    Rational constant_term() const;
    std::size_t size() const { return terms_.size(); }
    const TermMap& terms() const { return terms_; }

    void add_term(const Monomial& m, const Rational& c);

    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator-() const;
    Poly operator*(const Poly& o) const;
    Poly scaled(const Rational& c) const;
    Poly& operator+=(const Poly& o);

    Poly diff(int var) const;
    int degree_in(int var) const;
    int min_degree_in(int var) const;
    // Coefficient of var^k as a polynomial with var removed (exponent 0).
    Poly coeff_in(int var, int k) const;
    // Multiply by var^k; k may be negative when every term is divisible.
    Poly shifted(int var, int k) const;

    // Weight of each term under the given per-variable weights, if all agree.
    std::optional<Rational> homogeneous_weight(const std::vector<Rational>& w) const;

    bool operator==(const Poly& o) const { return nvars_ == o.nvars_ && terms_ == o.terms_; }
    bool operator!=(const Poly& o) const { return !(*this == o); }

private:
    int nvars_ = 0;
    TermMap terms_;
};

class Ring;
using RingPtr = std::shared_ptr<const Ring>;

// Polynomial ring Q[t_1..t_n], optionally extended by one algebraic z with
// rel(t, z) = 0. Variables are indexed 0..n-1 for t and n for z.
class Ring {
public:
    static RingPtr plain(std::vector<Rational> weights);
    static RingPtr extension(std::vector<Rational> weights, std::string gen, Rational z_weight,
                             const Poly& relation);

    int n() const { return n_; }
    int nvars() const { return n_ + 1; }
    int zvar() const { return n_; }
    const std::vector<Rational>& weights() const { return weights_; }
    // Weights of t_1..t_n and z (0 for the plain ring).
    const std::vector<Rational>& all_weights() const { return all_weights_; }
    bool has_extension() const { return has_ext_; }
    const std::string& gen() const { return gen_; }
    const Rational& z_weight() const { return all_weights_[n_]; }
    int z_degree() const { return zdeg_; }
    const Poly& relation() const { return rel_; }
    const Poly& rel_z() const { return R_; }
    const Poly& rel_t(int i) const { return rel_t_[i]; }
    const Rational& rel_z_weight() const { return R_weight_; }

    std::string var_name(int var) const;

    Poly reduce(const Poly& p) const;
    // c * z^a * R^b reduced, for atom-monomial matching.
    Poly atom_power(int a, int b) const;
    // If p = c * z^a * R^b (after reduction), return (c, a, b).
    std::optional<std::tuple<Rational, int, int>> match_atom_monomial(const Poly& p) const;

    bool same_as(const Ring& o) const;

private:
    Ring() = default;
    int n_ = 0;
    std::vector<Rational> weights_;
    std::vector<Rational> all_weights_;
    bool has_ext_ = false;
    std::string gen_ = "z";
    int zdeg_ = 0;
    Rational lc_;
    std::vector<Poly> lower_;  // rel = lc z^d + sum_k lower_[k] z^k
    Poly rel_;
    Poly R_;
    std::vector<Poly> rel_t_;
    Rational R_weight_;
    mutable std::mutex cache_mu_;
    mutable std::map<std::pair<int, int>, Poly> power_cache_;
};

// Ring element num / (z^a * R^b) where R = d rel / dz; num reduced mod rel.
class Elem {
public:
    Elem() = default;
    Elem(RingPtr ring, Poly num, int z_den = 0, int r_den = 0);

    static Elem constant(RingPtr ring, const Rational& c);
    static Elem var(RingPtr ring, int var);

    const RingPtr& ring() const { return ring_; }
    const Poly& num() const { return num_; }
    int z_den() const { return za_; }
    int r_den() const { return rb_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_polynomial() const { return za_ == 0 && rb_ == 0; }

    Elem operator+(const Elem& o) const;
    Elem operator-(const Elem& o) const;
    Elem operator-() const;
    Elem operator*(const Elem& o) const;
    Elem scaled(const Rational& c) const;
    Elem pow(unsigned e) const;
    Elem& operator+=(const Elem& o) { return *this = *this + o; }
    Elem& operator-=(const Elem& o) { return *this = *this - o; }

    // Value equality (difference reduces to zero).
    bool equals(const Elem& o) const { return (*this - o).is_zero(); }
    // Representation equality.
    bool structurally_equal(const Elem& o) const {
        return num_ == o.num_ && za_ == o.za_ && rb_ == o.rb_;
    }

    // Division by c * z^a * R^b; throws DivisionNotExact otherwise.
    Elem divided_by(const Elem& d) const;

    std::optional<Rational> homogeneous_weight() const;

private:
    void canonicalize();
    RingPtr ring_;
    Poly num_;
    int za_ = 0;
    int rb_ = 0;
};

Elem partial(const Elem& f, int var);
Elem euler_apply(const Elem& f);
bool is_homogeneous(const Elem& f, const Rational& w);
// Value of f when it is a rational constant (denominators may still be present).
std::optional<Rational> constant_value(const Elem& f);

// ---- numerics ----

// Roots of rel(t, .) at numeric t (companion matrix).
std::vector<cd> relation_roots(const Ring& ring, const std::vector<cd>& t);
// Newton polish of a relation root from a seed; checks separation.
cd solve_root(const Ring& ring, const std::vector<cd>& t, cd seed, double separation = 1e-9);

// Compiled numeric evaluation of a batch of elements sharing one ring.
class Evaluator {
public:
    Evaluator() = default;
    Evaluator(RingPtr ring, const std::vector<Elem>& elems);
    std::size_t size() const { return items_.size(); }
    // Values at t (length n) and root z.
    std::vector<cd> operator()(const std::vector<cd>& t, cd z) const;

private:
    struct Compiled {
        std::vector<std::pair<cd, Monomial>> terms;
        int za = 0;
        int rb = 0;
    };
    RingPtr ring_;
    std::vector<Compiled> items_;
    Compiled rz_;
    std::vector<int> maxdeg_;
};

cd eval(const Elem& f, const std::vector<cd>& t, cd root_seed = cd(0), double separation = 1e-9);

// Continuous tracking of one relation root along a path in t.
class RootTracker {
public:
    RootTracker(RingPtr ring, std::vector<cd> t0, cd seed, double separation = 1e-9);
    cd z() const { return z_; }
    const std::vector<cd>& point() const { return t_; }
    cd move_to(const std::vector<cd>& t);
    // Smallest distance from the tracked root to another root at the current point.
    double separation() const;

private:
    RingPtr ring_;
    std::vector<cd> t_;
    cd z_;
    double sep_;
};

std::string to_string(const Rational& q);

}  // namespace flatstruct
