#include "flatstruct/matrix.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace flatstruct {

ElemMatrix zero_matrix(const RingPtr& r, int rows, int cols) {
    return ElemMatrix(rows, std::vector<Elem>(cols, Elem::constant(r, 0)));
}

ElemMatrix identity_matrix(const RingPtr& r, int n) {
    auto m = zero_matrix(r, n, n);
    for (int i = 0; i < n; ++i) m[i][i] = Elem::constant(r, 1);
    return m;
}

ElemMatrix diagonal_matrix(const RingPtr& r, const std::vector<Rational>& d) {
    int n = static_cast<int>(d.size());
    auto m = zero_matrix(r, n, n);
    for (int i = 0; i < n; ++i) m[i][i] = Elem::constant(r, d[i]);
    return m;
}

ElemMatrix operator+(const ElemMatrix& a, const ElemMatrix& b) {
    ElemMatrix c = a;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) c[i][j] = a[i][j] + b[i][j];
    return c;
}

ElemMatrix operator-(const ElemMatrix& a, const ElemMatrix& b) {
    ElemMatrix c = a;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) c[i][j] = a[i][j] - b[i][j];
    return c;
}

ElemMatrix operator*(const ElemMatrix& a, const ElemMatrix& b) {
    std::size_t n = a.size(), m = b.empty() ? 0 : b[0].size(), k = b.size();
    ElemMatrix c(n, std::vector<Elem>(m));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            Elem s;
            for (std::size_t l = 0; l < k; ++l) {
                if (a[i][l].is_zero() || b[l][j].is_zero()) continue;
                s += a[i][l] * b[l][j];
            }
            if (!s.ring()) s = Elem::constant(a[i][0].ring() ? a[i][0].ring() : b[0][j].ring(), 0);
            c[i][j] = s;
        }
    return c;
}

ElemMatrix scaled(const ElemMatrix& a, const Rational& c) {
    ElemMatrix r = a;
    for (auto& row : r)
        for (auto& e : row) e = e.scaled(c);
    return r;
}

ElemMatrix scaled(const ElemMatrix& a, const Elem& c) {
    ElemMatrix r = a;
    for (auto& row : r)
        for (auto& e : row) e = e * c;
    return r;
}

ElemMatrix commutator(const ElemMatrix& a, const ElemMatrix& b) { return a * b - b * a; }

ElemMatrix transpose(const ElemMatrix& a) {
    if (a.empty()) return a;
    ElemMatrix t(a[0].size(), std::vector<Elem>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) t[j][i] = a[i][j];
    return t;
}

ElemMatrix partial(const ElemMatrix& a, int var) {
    ElemMatrix r = a;
    for (auto& row : r)
        for (auto& e : row) e = partial(e, var);
    return r;
}

bool is_zero(const ElemMatrix& a) {
    for (const auto& row : a)
        for (const auto& e : row)
            if (!e.is_zero()) return false;
    return true;
}

bool equals(const ElemMatrix& a, const ElemMatrix& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b[i].size()) return false;
        for (std::size_t j = 0; j < a[i].size(); ++j)
            if (!a[i][j].equals(b[i][j])) return false;
    }
    return true;
}

namespace {

RingPtr ring_of(const ElemMatrix& a) {
    for (const auto& row : a)
        for (const auto& e : row)
            if (e.ring()) return e.ring();
    return nullptr;
}

}  // namespace

Elem determinant(const ElemMatrix& a) {
    int n = static_cast<int>(a.size());
    RingPtr r = ring_of(a);
    if (n == 0) return r ? Elem::constant(r, 1) : Elem();
    // minors[mask] = det of rows (n - popcount(mask))..n-1, columns in mask
    std::unordered_map<unsigned, Elem> minors;
    minors[0] = Elem::constant(r, 1);
    for (int size = 1; size <= n; ++size) {
        int row = n - size;
        std::unordered_map<unsigned, Elem> next;
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            if (std::popcount(mask) != size) continue;
            Elem s = Elem::constant(r, 0);
            int sign_pos = 0;
            for (int c = 0; c < n; ++c) {
                if (!(mask & (1u << c))) continue;
                const Elem& x = a[row][c];
                if (!x.is_zero()) {
                    Elem term = x * minors.at(mask & ~(1u << c));
                    s = (sign_pos % 2 == 0) ? s + term : s - term;
                }
                ++sign_pos;
            }
            next[mask] = s;
        }
        minors.swap(next);
    }
    return minors.at((1u << n) - 1);
}

Elem determinant_leibniz(const ElemMatrix& a) {
    int n = static_cast<int>(a.size());
    RingPtr r = ring_of(a);
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    Elem s = Elem::constant(r, 0);
    do {
        int inv = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (p[i] > p[j]) ++inv;
        Elem term = Elem::constant(r, inv % 2 ? -1 : 1);
        for (int i = 0; i < n && !term.is_zero(); ++i) term = term * a[i][p[i]];
        s += term;
    } while (std::next_permutation(p.begin(), p.end()));
    return s;
}

ElemMatrix adjugate(const ElemMatrix& a) {
    int n = static_cast<int>(a.size());
    RingPtr r = ring_of(a);
    ElemMatrix adj = zero_matrix(r, n, n);
    if (n == 1) {
        adj[0][0] = Elem::constant(r, 1);
        return adj;
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            ElemMatrix minor;
            for (int k = 0; k < n; ++k) {
                if (k == i) continue;
                std::vector<Elem> row;
                for (int l = 0; l < n; ++l)
                    if (l != j) row.push_back(a[k][l]);
                minor.push_back(row);
            }
            Elem d = determinant(minor);
            adj[j][i] = (i + j) % 2 ? -d : d;
        }
    return adj;
}

std::vector<std::vector<cd>> evaluate(const ElemMatrix& a, const std::vector<cd>& t, cd z) {
    RingPtr r = ring_of(a);
    std::vector<Elem> flat;
    for (const auto& row : a)
        for (const auto& e : row) flat.push_back(e);
    std::vector<std::vector<cd>> out(a.size());
    if (!r) {
        for (std::size_t i = 0; i < a.size(); ++i) out[i].assign(a[i].size(), cd(0));
        return out;
    }
    Evaluator ev(r, flat);
    auto v = ev(t, z);
    std::size_t k = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) out[i].push_back(v[k++]);
    return out;
}

}  // namespace flatstruct
