#include "flatstruct/midconv.hpp"

#include <cmath>

namespace flatstruct {

namespace {

CMat diag_of(const std::vector<cd>& d) {
    CMat D = CMat::Zero(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) D(i, i) = d[i];
    return D;
}

// Kernel of M with a fixed dimension; columns orthonormal.
CMat null_basis(const CMat& M, int dim) {
    Eigen::JacobiSVD<CMat> svd(M, Eigen::ComputeFullV);
    return svd.matrixV().rightCols(dim);
}

int kernel_dim(const CMat& M, double rel_tol) {
    Eigen::JacobiSVD<CMat> svd(M);
    const auto& s = svd.singularValues();
    double top = s.size() ? s(0) : 0;
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * std::max(top, 1.0)) ++rank;
    return static_cast<int>(M.cols()) - rank;
}

}  // namespace

CMat RankOneSystem::Gamma_inf() const { return diag_of(lambda); }

std::vector<std::vector<cd>> eigenvalue_gradients(const OkuboNumeric& ok) {
    int n = ok.n;
    CMat Pinv = ok.P.inverse();
    std::vector<std::vector<cd>> dz(n, std::vector<cd>(ok.Btilde.size()));
    for (std::size_t i = 0; i < ok.Btilde.size(); ++i) {
        const CMat& Bt = ok.Btilde[i];
        CMat dT = -Bt - (Bt * ok.Binf - ok.Binf * Bt);
        CMat D = Pinv * dT * ok.P;
        for (int j = 0; j < n; ++j) dz[j][i] = D(j, j);
    }
    return dz;
}

RankOneSystem truncate_okubo(const OkuboNumeric& ok) {
    int n = ok.n;
    if (n < 2) throw ConditionDViolation("truncation needs n >= 2");
    if (std::abs(ok.Binf(n - 1, n - 1)) > 1e-12)
        throw ConditionDViolation("the last eigenvalue of B_inf must be shifted to 0");
    int m = n - 1;
    RankOneSystem sys;
    sys.n = n;
    sys.z.assign(ok.z.data(), ok.z.data() + n);
    sys.dz = eigenvalue_gradients(ok);
    CMat Pinv = ok.P.inverse();
    sys.B = ok.P.topRows(m);
    sys.A = Pinv.leftCols(m);
    for (int j = 0; j < n; ++j) sys.Gamma.push_back(ok.residues[j].topLeftCorner(m, m));
    for (int i = 0; i < m; ++i) sys.lambda.push_back(ok.Binf(i, i));
    validate_conditions(sys);
    return sys;
}

void validate_conditions(const RankOneSystem& sys, double tol) {
    int m = sys.n - 1;
    CMat Ginf = sys.Gamma_inf();
    CMat sum = Ginf;
    for (const auto& G : sys.Gamma) sum += G;
    if (sum.norm() > tol * std::max(1.0, Ginf.norm()))
        throw ConditionDViolation("(D4): residues do not sum to -Gamma_inf");
    for (int i = 0; i < m; ++i)
        if (std::abs(sys.lambda[i]) < tol) throw ConditionDViolation("(D4): lambda_" + std::to_string(i + 1) + " = 0");
    for (int j = 0; j < sys.n; ++j) {
        const CMat& G = sys.Gamma[j];
        Eigen::JacobiSVD<CMat> svd(G);
        const auto& s = svd.singularValues();
        if (s(0) < tol || (s.size() > 1 && s(1) > 1e-8 * s(0)))
            throw ConditionDViolation("(D3): Gamma_" + std::to_string(j + 1) + " does not have rank 1");
        cd tr = G.trace();
        if (std::abs(tr - 1.0) < 1e-6 || std::abs(tr + 1.0) < 1e-6)
            throw ConditionDViolation("(D3): tr Gamma_" + std::to_string(j + 1) + " = +-1");
    }
}

std::vector<cd> ConvolutionResult::traces() const {
    std::vector<cd> out;
    for (const auto& G : residues) out.push_back(G.trace());
    return out;
}

std::vector<CMat> ConvolutionResult::x_residues(int i) const {
    std::vector<CMat> out;
    for (std::size_t j = 0; j < residues.size(); ++j) out.push_back(-dz[j][i] * residues[j]);
    return out;
}

ConvolutionResult middle_convolution(const RankOneSystem& sys, cd lambda, std::array<int, 2> gauge) {
    int n = sys.n, m = n - 1;
    if (std::abs(lambda) < 1e-8) throw ResonantLambda("lambda = 0");
    for (int i = 0; i < m; ++i)
        if (std::abs(lambda - sys.lambda[i]) < 1e-8)
            throw ResonantLambda("lambda coincides with lambda_" + std::to_string(i + 1));

    ConvolutionResult res;
    res.lambda = lambda;
    res.z = sys.z;
    res.dz = sys.dz;
    res.pivot = -1;
    for (int j = 0; j < m && res.pivot < 0; ++j) {
        bool ok = true;
        for (int i = 0; i < n; ++i)
            if (std::abs(sys.A(i, j)) <= 1e-8) ok = false;
        if (ok) res.pivot = j;
    }
    if (res.pivot < 0) throw PivotColumnNotFound("no column of a has all entries away from zero");

    CVec an = null_basis(sys.B, 1).col(0);
    Eigen::RowVectorXcd bn = null_basis(sys.A.transpose(), 1).col(0).transpose();
    cd pair = (bn * an)(0);
    if (std::abs(pair) < 1e-12) throw InverseMismatch("completion vectors are orthogonal");
    bn /= pair;
    // b_n a_n = 1 leaves a_n -> s a_n, b_n -> b_n / s; b_{n,k} a_{k,q} is invariant under
    // rescaling the columns of P, so fixing it pins the gauge independently of P.
    if (gauge[0] < 0) {
        double best = -1;
        for (int k = 0; k < n; ++k)
            for (int q = 0; q < m; ++q)
                if (std::abs(bn(k) * sys.A(k, q)) > best) {
                    best = std::abs(bn(k) * sys.A(k, q));
                    gauge = {k, q};
                }
    }
    cd g = bn(gauge[0]) * sys.A(gauge[0], gauge[1]);
    if (std::abs(g) < 1e-12) throw PivotColumnNotFound("gauge entry vanishes");
    an *= g;
    bn /= g;
    res.gauge = gauge;

    res.P = CMat(n, n);
    res.P.topRows(m) = sys.B;
    res.P.row(m) = bn;
    res.Pinv = CMat(n, n);
    res.Pinv.leftCols(m) = sys.A;
    res.Pinv.col(m) = an;
    std::vector<cd> d;
    for (int i = 0; i < m; ++i) d.push_back(sys.lambda[i] - lambda);
    d.push_back(-lambda);
    res.Ginf = diag_of(d);
    for (int j = 0; j < n; ++j) res.residues.push_back(-res.P.col(j) * res.Pinv.row(j) * res.Ginf);
    return res;
}

double convolution_schlesinger_residual(const std::vector<ConvolutionResult>& snaps, double h) {
    if (snaps.size() < 5) throw InsufficientSamples("at least 5 snapshots are required");
    int n = static_cast<int>(snaps[0].residues.size());
    CMat E = CMat::Zero(n, n);
    E(n - 1, n - 1) = 1;
    double worst = 0;
    for (std::size_t k = 2; k + 2 < snaps.size(); ++k) {
        const auto& c = snaps[k];
        std::vector<CMat> D, G;
        for (int i = 0; i < n; ++i) {
            std::array<CMat, 5> bs;
            std::array<cd, 5> zi;
            for (int q = 0; q < 5; ++q) {
                bs[q] = snaps[k - 2 + q].residues[i];
                zi[q] = snaps[k - 2 + q].z[i];
            }
            CMat rhs = CMat::Zero(n, n);
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                std::array<cd, 5> zj;
                for (int q = 0; q < 5; ++q) zj[q] = snaps[k - 2 + q].z[j];
                cd dlog = (stencil_d1(zi, h) - stencil_d1(zj, h)) / (c.z[i] - c.z[j]);
                rhs += (c.residues[j] * c.residues[i] - c.residues[i] * c.residues[j]) * dlog;
            }
            D.push_back(stencil_d1(bs, h) - rhs);
            G.push_back(E * c.residues[i] - c.residues[i] * E);
        }
        cd num = 0;
        double den = 0;
        for (int i = 0; i < n; ++i) {
            num += (G[i].adjoint() * D[i]).trace();
            den += G[i].squaredNorm();
        }
        cd gauge = den > 0 ? num / den : cd(0);
        for (int i = 0; i < n; ++i) worst = std::max(worst, (D[i] - gauge * G[i]).norm());
    }
    return worst;
}

CMat convolution_Gz(const RankOneSystem& sys, cd lambda, cd z) {
    int n = sys.n, m = n - 1;
    CMat G = CMat::Zero(n * m, n * m);
    CMat I = CMat::Identity(m, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            G.block(i * m, j * m, m, m) = (sys.Gamma[j] + (i == j ? lambda : cd(0)) * I) / (z - sys.z[i]);
    return G;
}

CMat convolution_Gx(const RankOneSystem& sys, cd lambda, cd z, int k) {
    int n = sys.n, m = n - 1;
    CMat G = CMat::Zero(n * m, n * m);
    CMat I = CMat::Identity(m, m);
    for (int i = 0; i < n; ++i) {
        cd di = sys.dz[i][k];
        CMat diag = -di * (sys.Gamma[i] + lambda * I) / (z - sys.z[i]);
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            cd dj = sys.dz[j][k];
            CMat coupling = (di - dj) * sys.Gamma[j] / (sys.z[i] - sys.z[j]);
            G.block(i * m, j * m, m, m) = -di * sys.Gamma[j] / (z - sys.z[i]) - coupling;
            diag += coupling;
        }
        G.block(i * m, i * m, m, m) = diag;
    }
    return G;
}

namespace {

CMat constraint_K(const RankOneSystem& sys) {
    int n = sys.n, m = n - 1;
    CMat C = CMat::Zero(n * m, n * m);
    for (int i = 0; i < n; ++i) C.block(i * m, i * m, m, m) = sys.Gamma[i];
    return C;
}

CMat constraint_L(const RankOneSystem& sys, cd lambda) {
    int n = sys.n, m = n - 1;
    CMat C(n * m, n * m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            C.block(i * m, j * m, m, m) = sys.Gamma[j] + (i == j ? lambda : cd(0)) * CMat::Identity(m, m);
    return C;
}

}  // namespace

InvariantSubspaceReport invariant_subspace_check(const RankOneSampler& sampler, const std::vector<cd>& x,
                                                 cd lambda, const std::vector<cd>& zs, double h) {
    InvariantSubspaceReport rep;
    RankOneSystem s0 = sampler(x);
    int nx = static_cast<int>(x.size());
    // neighbours along each coordinate, q = -2..2
    std::vector<std::array<RankOneSystem, 5>> nb(nx);
    for (int k = 0; k < nx; ++k)
        for (int q = -2; q <= 2; ++q) {
            if (q == 0) {
                nb[k][2] = s0;
                continue;
            }
            std::vector<cd> xq = x;
            xq[k] += double(q) * h;
            nb[k][q + 2] = sampler(xq);
        }

    auto run = [&](auto constraint, int& dim) {
        CMat C0 = constraint(s0);
        dim = kernel_dim(C0, 1e-8);
        if (dim == 0) return;
        CMat U = null_basis(C0, dim);
        double cn = std::max(C0.norm(), 1.0);
        auto measure = [&](const CMat& W) {
            double worst = 0;
            for (int c = 0; c < W.cols(); ++c) {
                double wn = std::max(W.col(c).norm(), 1.0);
                worst = std::max(worst, (C0 * W.col(c)).norm() / (cn * wn));
            }
            return worst;
        };
        for (cd z : zs) {
            rep.defect_z = std::max(rep.defect_z, measure(-convolution_Gz(s0, lambda, z) * U));
            for (int k = 0; k < nx; ++k) {
                std::array<CMat, 5> vs;
                for (int q = 0; q < 5; ++q) {
                    CMat N = null_basis(constraint(nb[k][q]), dim);
                    vs[q] = N * N.adjoint() * U;
                }
                CMat W = stencil_d1(vs, h) - convolution_Gx(s0, lambda, z, k) * U;
                rep.defect_x = std::max(rep.defect_x, measure(W));
            }
        }
    };
    run([](const RankOneSystem& s) { return constraint_K(s); }, rep.dim_K);
    run([&](const RankOneSystem& s) { return constraint_L(s, lambda); }, rep.dim_L);
    return rep;
}

bool RoundTripReport::passed(double tol, double invariant_tol) const {
    return trace_error < tol && lambda_error < tol && rank_ratio < 1e-8 && sum_error < 1e-10 &&
           invariant.max_defect() < invariant_tol && invariant.dim_L == 0;
}

RoundTripReport midconv_round_trip(const SaitoMatrices& m, const std::vector<cd>& point, cd zgen, cd probe) {
    SaitoEvaluator ev(m);
    int n = m.n();
    RoundTripReport rep;
    for (const auto& w : m.Binf) rep.lambda.emplace_back(w.get_d());
    std::vector<cd> shifted;
    for (cd l : rep.lambda) shifted.push_back(l - rep.lambda.back());

    ZTracker zt(m.ring, point, zgen);
    cd z0 = zt.at(point);
    auto orig = okubo_from_matrices(ev.T(point, z0), ev.Btilde(point, z0), rep.lambda);
    rep.original_traces = orig.r;
    Eigensystem e0{orig.z, orig.P};
    auto snapshot = [&](const std::vector<cd>& x) {
        ZTracker local = zt;
        cd z = local.at(x);
        return truncate_okubo(okubo_from_matrices(ev.T(x, z), ev.Btilde(x, z), shifted, &e0));
    };

    auto sys = snapshot(point);
    auto res = middle_convolution(sys, -rep.lambda.back());
    // labels are shared with the original system, so traces compare index by index
    rep.recovered_traces = res.traces();
    for (int i = 0; i < n; ++i) {
        rep.recovered_lambda.push_back(res.Ginf(i, i));
        rep.trace_error = std::max(rep.trace_error, std::abs(rep.recovered_traces[i] - rep.original_traces[i]));
        rep.lambda_error = std::max(rep.lambda_error, std::abs(rep.recovered_lambda[i] - rep.lambda[i]));
    }
    CMat sum = res.Ginf;
    for (const auto& G : res.residues) {
        sum += G;
        Eigen::JacobiSVD<CMat> svd(G);
        const auto& s = svd.singularValues();
        rep.rank_ratio = std::max(rep.rank_ratio, s(0) > 0 ? s(1) / s(0) : 1.0);
    }
    rep.sum_error = sum.norm() / std::max(1.0, res.Ginf.norm());

    std::vector<cd> zs;
    double spread = 0;
    for (cd a : sys.z) spread = std::max(spread, std::abs(a - sys.z[0]));
    spread = std::max(spread, 1.0);
    for (std::size_t j = 0; j < sys.z.size(); ++j) zs.push_back(sys.z[j] + spread * cd(0.23, 0.31));
    rep.invariant = invariant_subspace_check(snapshot, point, probe, zs);
    return rep;
}

}  // namespace flatstruct
