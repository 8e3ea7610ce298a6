#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "flatstruct/isomono.hpp"

namespace flatstruct {

// Rank n-1 Pfaffian system with n rank-one residues Gamma_j = -b_j a_j Gamma_inf.
struct RankOneSystem {
    int n = 0;                          // number of singular points
    std::vector<cd> z;                  // z_j
    std::vector<std::vector<cd>> dz;    // dz[j][i] = d z_j / d x_i
    std::vector<CMat> Gamma;            // (n-1) x (n-1)
    CMat B;                             // (n-1) x n, column j is b_j
    CMat A;                             // n x (n-1), row j is a_j
    std::vector<cd> lambda;             // diagonal of Gamma_inf

    CMat Gamma_inf() const;
};

// Leading blocks of an Okubo snapshot whose last B_inf entry is zero.
RankOneSystem truncate_okubo(const OkuboNumeric& ok);
// d z_j / d x_i = (P^{-1} dT/dx_i P)_jj with dT/dx_i = -B~i - [B~i, B_inf].
std::vector<std::vector<cd>> eigenvalue_gradients(const OkuboNumeric& ok);
// Conditions (D3), (D4); throws ConditionDViolation.
void validate_conditions(const RankOneSystem& sys, double tol = 1e-10);

struct ConvolutionResult {
    cd lambda;
    std::vector<cd> z;
    std::vector<std::vector<cd>> dz;
    std::vector<CMat> residues;  // hat Gamma_j, n x n
    CMat Ginf;                   // diag(lambda_1 - lambda, ..., -lambda)
    CMat P;                      // columns hat b_j
    CMat Pinv;                   // rows hat a_j
    int pivot = 0;               // first column with every a_{i,j} away from zero
    std::array<int, 2> gauge{};  // (k, q) with hat b_{n,k} hat a_{k,q} = 1
    cd epsilon = 1;
    std::vector<cd> traces() const;
    // hat Gamma^{(i)}_j = -dz_j/dx_i hat Gamma_j
    std::vector<CMat> x_residues(int i) const;
};

// The completion is fixed up to the epsilon gauge; gauge = (k, q) sets hat b_{n,k} hat a_{k,q} = 1,
// which depends only on the residues. {-1, -1} picks the pair of largest modulus.
ConvolutionResult middle_convolution(const RankOneSystem& sys, cd lambda, std::array<int, 2> gauge = {-1, -1});

// Schlesinger defect of equally spaced convolution snapshots, modulo the diagonal epsilon gauge.
double convolution_schlesinger_residual(const std::vector<ConvolutionResult>& snaps, double h);

using RankOneSampler = std::function<RankOneSystem(const std::vector<cd>&)>;

struct InvariantSubspaceReport {
    int dim_K = 0;
    int dim_L = 0;
    double defect_z = 0;  // (d/dz - G^(z)) applied to the subspaces
    double defect_x = 0;  // (d/dx_k - G^(k))
    double max_defect() const { return std::max(defect_z, defect_x); }
};

// Block matrices of the rank n(n-1) convolution system.
CMat convolution_Gz(const RankOneSystem& sys, cd lambda, cd z);
CMat convolution_Gx(const RankOneSystem& sys, cd lambda, cd z, int k);

InvariantSubspaceReport invariant_subspace_check(const RankOneSampler& sampler, const std::vector<cd>& x,
                                                 cd lambda, const std::vector<cd>& zs, double h = 1e-4);

struct RoundTripReport {
    std::vector<cd> lambda;            // B_inf eigenvalues of the original system
    std::vector<cd> original_traces;   // r_i
    std::vector<cd> recovered_traces;  // traces of hat Gamma_j, matched to r_i
    std::vector<cd> recovered_lambda;  // diagonal of hat Gamma_inf
    double trace_error = 0;
    double lambda_error = 0;
    double rank_ratio = 0;  // largest sigma_2 / sigma_1 over the output residues
    double sum_error = 0;   // |sum hat Gamma_j + hat Gamma_inf|
    InvariantSubspaceReport invariant;
    bool passed(double tol = 1e-8, double invariant_tol = 1e-6) const;
};

// Truncate the Okubo snapshot at point (lambda_n shifted to 0), convolve with -lambda_n, compare.
// probe is the generic lambda used for the invariant subspace diagnostic.
RoundTripReport midconv_round_trip(const SaitoMatrices& m, const std::vector<cd>& point, cd zgen = 0,
                                   cd probe = cd(0.31, 0.17));

}  // namespace flatstruct
