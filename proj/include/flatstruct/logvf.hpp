#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flatstruct/flatcore.hpp"

namespace flatstruct {

// h monic of degree n in t_n.
struct DivisorData {
    Elem h;
    int n = 0;
};

// Row i holds the coefficients of V_{n+1-i} against d/dt_1..d/dt_n.
using VectorFieldMatrix = ElemMatrix;

DivisorData make_divisor(const Elem& h, int n);
DivisorData discriminant(const SaitoMatrices& m);

// Coefficient of t_n^k; requires the ring relation to be free of t_n.
Elem coeff_tn(const Elem& f, int k);
int degree_tn(const Elem& f);
// Exact quotient by the monic h, absent when the remainder is nonzero.
std::optional<Elem> divide_by_monic(const Elem& f, const DivisorData& d);

Elem apply_field(const std::vector<Elem>& V, const Elem& f);
bool is_logarithmic(const std::vector<Elem>& V, const DivisorData& d);

// c with det(MV) = c h; throws RowNotLogarithmic for the first failing row (1-based).
std::optional<Rational> saito_criterion(const VectorFieldMatrix& MV, const DivisorData& d);

struct LogvfReport {
    bool euler_row = false;       // last row of -T is sum w_i t_i d/dt_i
    bool euler_scaling = false;   // V_1 h = n h
    bool s1_relation = false;     // V_i h / h = -d s_1 / d t_{n-i+1}, i > 1
    bool weight_duality = false;  // w(M_ij) = 1 - w_i + w_j
    bool trace_relation = false;  // (row k of -T) h = tr(B~(k)) h
    std::vector<std::string> failed;

    bool passed() const { return failed.empty(); }
};

LogvfReport logvf_identities(const SaitoMatrices& m);

}  // namespace flatstruct
