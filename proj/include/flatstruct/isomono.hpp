#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "flatstruct/numeric.hpp"

namespace flatstruct {

struct OkuboNumeric {
    int n = 0;
    std::vector<cd> point;
    CMat T;
    std::vector<CMat> Btilde;
    CMat Binf;
    CVec z;                        // eigenvalues of T
    CMat P;                        // P^{-1} T P = diag(z)
    std::vector<CMat> residues;    // B_i = -P E_i P^{-1} B_inf
    std::vector<cd> r;             // tr B_i
    bool traces_admissible = true;  // no r_i within 1e-6 of +-1
};

// Residues of -(zI - T)^{-1} B_inf at the eigenvalues of T(point); zgen is the extension root.
OkuboNumeric residue_decomposition(const SaitoMatrices& m, const std::vector<cd>& point,
                                   const std::vector<cd>& lambda, cd zgen = 0, double rank_tol = 1e-9);
OkuboNumeric okubo_from_matrices(const CMat& T, const std::vector<CMat>& Btilde, const std::vector<cd>& lambda,
                                 const Eigensystem* prev = nullptr, double rank_tol = 1e-9);

struct IntegrabilityReport {
    bool commute = false;  // [B~i, B~j] = 0
    bool ci1 = false;      // [T, B~i] = 0
    bool ci3 = false;      // dT/dx_i + B~i + [B~i, B_inf] = 0
    std::vector<std::string> failed;
    bool passed() const { return failed.empty(); }
};

// B_inf = diag(w) + shift.
IntegrabilityReport check_integrability(const SaitoMatrices& m, const Rational& shift = 0);

// Pfaffian system dY = (sum_k Omega_k(x) dx_k) Y.
using ConnectionSampler = std::function<std::vector<CMat>(const std::vector<cd>&)>;

struct PathSpec {
    std::vector<std::vector<cd>> points;
    double max_step = 1e-2;  // in units of each segment's parameter
    double tol = 1e-10;      // local error per unit step
};

struct PfaffianResult {
    CMat Y;
    std::vector<CMat> at_points;
    cd trace_integral = 0;    // integral of tr(connection)
    double liouville_defect = 0;  // |det Y - det Y0 exp(trace_integral)| / |det Y|
    long steps = 0;
};

PfaffianResult integrate_pfaffian(const ConnectionSampler& omega, const PathSpec& path, const CMat& Y0);

// One variable Okubo connection -(zI - T)^{-1} B_inf at fixed x.
ConnectionSampler okubo_z_connection(const CMat& T, const CMat& Binf);
// Monodromy along a circle of the given radius around z0.
CMat monodromy_around(const ConnectionSampler& omega, cd z0, double radius, cd base_offset_dir = 1,
                      int segments = 64, double tol = 1e-10);

// Snapshots equally spaced by h in a path parameter; labels matched by eigenvalue distance.
double schlesinger_residual(const std::vector<OkuboNumeric>& snaps, double h);

struct SchlesingerRun {
    std::vector<double> residuals;       // one per path point
    std::vector<std::vector<cd>> traces;  // residue traces at each point
    double max_residual = 0;
    double trace_drift = 0;  // max |r_i(point) - r_i(first point)|
};

// Local stencils of step h along the path direction at each point (full t coordinates).
SchlesingerRun schlesinger_along_path(const SaitoMatrices& m, const std::vector<cd>& lambda,
                                      const std::vector<std::vector<cd>>& points, cd z_seed = 0, double h = 1e-3);

struct NormalForm {
    CMat P;     // columns b_i
    CMat Pinv;  // rows a_i
    CMat Bprime;  // P^{-1} B'_inf P
};

NormalForm okubo_normal_form(const std::vector<CMat>& residues, const CMat& Binf, double tol = 1e-10);

using M2 = Eigen::Matrix2cd;

struct JMSystem {
    M2 A0, A1, At;
    std::array<cd, 3> thetas{};  // theta0, theta1, thetat
    std::array<cd, 2> kappas{};
    cd y, ztilde, k, t;
    cd u, v, w, z0, z1, zt;

    M2 Ainf() const { return -(A0 + A1 + At); }
};

JMSystem jm_build(cd y, cd ztilde, cd k, std::array<cd, 3> thetas, std::array<cd, 2> kappas, cd t);

struct JMData {
    cd y, ztilde, k;
};
// Inverse of jm_build: recovers (y, ztilde, k) from the matrices.
JMData jm_extract(const M2& A0, const M2& A1, const M2& At, std::array<cd, 3> thetas, cd t);

struct HamState {
    cd t, y, ztilde, k;
};

struct HamRhs {
    cd dy, dztilde, dk;
};
HamRhs p6_hamiltonian_rhs(const HamState& s, std::array<cd, 3> thetas, std::array<cd, 2> kappas);

struct HamSample {
    HamState state;
    cd dy, d2y;
    std::array<HamState, 5> stencil;  // states at t + q h, q = -2..2
    double h = 0;
};

// RK4 trajectory through the given t values; each sample carries a local stencil.
std::vector<HamSample> integrate_p6_hamiltonian(std::array<cd, 3> thetas, std::array<cd, 2> kappas,
                                                const HamState& init, const std::vector<cd>& ts,
                                                double stencil_h = 1e-3);

// Defect of the 2x2 Schlesinger system at the stencil centre.
double jm_schlesinger_residual(const std::array<JMSystem, 5>& s, double h);

struct JMCase {
    std::array<cd, 3> thetas{};
    std::array<cd, 2> kappas{};
    HamState init;
    std::vector<cd> ts;
};

// Admissible parameters and initial data drawn from the seed; the t path is a short
// segment in the upper half plane away from 0 and 1.
JMCase random_jm_case(std::uint64_t seed, int samples = 20);

struct JMRoundTrip {
    JMCase input;
    double pvi_residual = 0;
    double schlesinger_residual = 0;
    double trace_error = 0;  // max |tr A_i - theta_i|
    double ainf_error = 0;   // max |A_inf - diag(kappa)|
    int steps = 0;

    bool passed(double residual_tol = 1e-6, double identity_tol = 1e-12) const;
};

JMRoundTrip jm_round_trip(const JMCase& c, double stencil_h = 1e-3);

}  // namespace flatstruct
