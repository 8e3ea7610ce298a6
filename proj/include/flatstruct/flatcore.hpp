#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "flatstruct/matrix.hpp"
#include "flatstruct/pvf.hpp"

namespace flatstruct {

struct SaitoMatrices {
    RingPtr ring;
    ElemMatrix C;                   // C_ij = d g_j / d t_i
    std::vector<ElemMatrix> Btilde;  // Btilde[k]_ij = d C_ij / d t_k
    ElemMatrix T;                   // -sum_k w_k t_k Btilde[k]
    std::vector<Rational> Binf;     // diagonal of B_inf

    int n() const { return static_cast<int>(Binf.size()); }
};

struct WdvvReport {
    bool unit_ok = false;
    bool homogeneity_ok = false;
    std::map<std::pair<int, int>, ElemMatrix> commutators;  // 0-based p < q
    bool saito_relations_ok = false;
    bool flat_normalization_ok = false;

    bool commutators_vanish() const;
    bool passed() const;
};

SaitoMatrices build_saito_matrices(const PotentialVF& pvf);

WdvvReport check_extended_wdvv(const PotentialVF& pvf);
bool check_saito_relations(const SaitoMatrices& m);
bool check_flat_normalization(const SaitoMatrices& m);

struct Prepotential {
    Elem F;
    std::vector<Rational> scaling;  // c_1..c_n with c_n = 1
    Rational weight;                // 1 - 2r
    Rational r;
};

// Absent when the weight pairing w_i + w_{n+1-i} = -2r fails; throws
// NoRescalingFound when no diagonal rescaling makes C J symmetric.
std::optional<Prepotential> frobenius_check(const PotentialVF& pvf);

// g_j = dF/dt_{n+1-j}.
PotentialVF pvf_from_prepotential(const std::string& name, const Elem& F);

// g_j(t) -> c_j g_j(t_1/c_1, ..., t_n/c_n).
PotentialVF rescale(const PotentialVF& pvf, const std::vector<Rational>& c);

struct OkuboData {
    RingPtr ring;
    ElemMatrix T;
    std::vector<Rational> lambda;
};

struct FlatCoordinates {
    std::vector<Elem> t;             // -(lambda_j - lambda_n + 1)^{-1} T_nj
    Elem jacobian;                   // det(d T_nj / d x_i)
    std::vector<cd> jacobian_values;  // at the sample points
};

FlatCoordinates flat_coords_from_okubo(const OkuboData& okubo,
                                       const std::vector<std::vector<cd>>& points,
                                       double tol = 1e-12);

}  // namespace flatstruct
