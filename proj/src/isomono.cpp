#include "flatstruct/isomono.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <random>

#include "flatstruct/p6.hpp"

namespace flatstruct {

namespace {

CMat diag_of(const std::vector<cd>& lambda) {
    int n = static_cast<int>(lambda.size());
    CMat L = CMat::Zero(n, n);
    for (int i = 0; i < n; ++i) L(i, i) = lambda[i];
    return L;
}

double rank1_ratio(const CMat& M) {
    Eigen::JacobiSVD<CMat> svd(M);
    const auto& s = svd.singularValues();
    if (s.size() < 2 || s(0) == 0) return 0;
    return s(1) / s(0);
}

}  // namespace

OkuboNumeric okubo_from_matrices(const CMat& T, const std::vector<CMat>& Btilde, const std::vector<cd>& lambda,
                                 const Eigensystem* prev, double rank_tol) {
    OkuboNumeric ok;
    ok.n = static_cast<int>(T.rows());
    if (static_cast<int>(lambda.size()) != ok.n) throw SchemaError("lambda has the wrong length");
    ok.T = T;
    ok.Btilde = Btilde;
    ok.Binf = diag_of(lambda);
    Eigensystem e = prev ? track_eigensystem(*prev, T) : eigensystem(T);
    ok.z = e.z;
    ok.P = e.P;
    CMat Pinv = e.P.inverse();
    for (int i = 0; i < ok.n; ++i) {
        CMat B = -(e.P.col(i) * Pinv.row(i)) * ok.Binf;
        if (rank1_ratio(B) >= rank_tol) throw RankViolation("residue " + std::to_string(i + 1) + " has rank above 1");
        ok.residues.push_back(B);
        cd r = B.trace();
        ok.r.push_back(r);
        if (std::abs(r - 1.0) < 1e-6 || std::abs(r + 1.0) < 1e-6) ok.traces_admissible = false;
    }
    return ok;
}

OkuboNumeric residue_decomposition(const SaitoMatrices& m, const std::vector<cd>& point,
                                   const std::vector<cd>& lambda, cd zgen, double rank_tol) {
    SaitoEvaluator ev(m);
    cd z = m.ring->has_extension() ? solve_root(*m.ring, point, zgen) : cd(0);
    OkuboNumeric ok = okubo_from_matrices(ev.T(point, z), ev.Btilde(point, z), lambda, nullptr, rank_tol);
    ok.point = point;
    return ok;
}

IntegrabilityReport check_integrability(const SaitoMatrices& m, const Rational& shift) {
    IntegrabilityReport rep;
    int n = m.n();
    std::vector<Rational> d = m.Binf;
    for (auto& x : d) x += shift;
    ElemMatrix binf = diagonal_matrix(m.ring, d);
    rep.commute = rep.ci1 = rep.ci3 = true;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j)
            if (!is_zero(commutator(m.Btilde[i], m.Btilde[j]))) rep.commute = false;
        if (!is_zero(commutator(m.T, m.Btilde[i]))) rep.ci1 = false;
        if (!is_zero(partial(m.T, i) + m.Btilde[i] + commutator(m.Btilde[i], binf))) rep.ci3 = false;
    }
    if (!rep.commute) rep.failed.push_back("commute");
    if (!rep.ci1) rep.failed.push_back("ci1");
    if (!rep.ci3) rep.failed.push_back("ci3");
    return rep;
}

PfaffianResult integrate_pfaffian(const ConnectionSampler& omega, const PathSpec& path, const CMat& Y0) {
    if (path.points.empty()) throw InsufficientSamples("empty path");
    int n = static_cast<int>(Y0.rows());
    PfaffianResult res;
    res.Y = Y0;
    res.at_points.push_back(Y0);
    for (std::size_t seg = 1; seg < path.points.size(); ++seg) {
        const auto& a = path.points[seg - 1];
        const auto& b = path.points[seg];
        std::vector<cd> d(a.size());
        for (std::size_t k = 0; k < d.size(); ++k) d[k] = b[k] - a[k];
        auto A = [&](double s) {
            auto om = omega(lerp_point(a, d, s));
            CMat acc = CMat::Zero(n, n);
            for (std::size_t k = 0; k < om.size(); ++k) acc += om[k] * d[k];
            return acc;
        };
        RhsFn f = [&](double s, const CVec& y) {
            CMat Am = A(s);
            Eigen::Map<const CMat> Y(y.data(), n, n);
            CVec out(n * n + 1);
            Eigen::Map<CMat>(out.data(), n, n) = Am * Y;
            out(n * n) = Am.trace();
            return out;
        };
        CVec y(n * n + 1);
        Eigen::Map<CMat>(y.data(), n, n) = res.Y;
        y(n * n) = res.trace_integral;
        y = rk4_adaptive(f, y, 0.0, 1.0, path.tol, path.max_step, &res.steps);
        res.Y = Eigen::Map<CMat>(y.data(), n, n);
        res.trace_integral = y(n * n);
        res.at_points.push_back(res.Y);
    }
    cd det = res.Y.determinant();
    cd expect = Y0.determinant() * std::exp(res.trace_integral);
    res.liouville_defect = std::abs(det - expect) / std::max(std::abs(det), 1e-300);
    return res;
}

ConnectionSampler okubo_z_connection(const CMat& T, const CMat& Binf) {
    return [T, Binf](const std::vector<cd>& x) {
        CMat zI = x[0] * CMat::Identity(T.rows(), T.cols());
        return std::vector<CMat>{-(zI - T).partialPivLu().solve(Binf)};
    };
}

CMat monodromy_around(const ConnectionSampler& omega, cd z0, double radius, cd dir, int segments, double tol) {
    PathSpec path;
    path.tol = tol;
    path.max_step = 0.25;
    dir /= std::abs(dir);
    for (int k = 0; k <= segments; ++k) {
        double th = 2 * std::numbers::pi * k / segments;
        path.points.push_back({z0 + radius * dir * std::exp(cd(0, th))});
    }
    int n = static_cast<int>(omega(path.points[0])[0].rows());
    return integrate_pfaffian(omega, path, CMat::Identity(n, n)).Y;
}

double schlesinger_residual(const std::vector<OkuboNumeric>& snaps, double h) {
    if (snaps.size() < 5) throw InsufficientSamples("at least 5 snapshots are required");
    int n = snaps[0].n;
    std::vector<CVec> z{snaps[0].z};
    std::vector<std::vector<CMat>> B{snaps[0].residues};
    for (std::size_t k = 1; k < snaps.size(); ++k) {
        auto perm = match_points(z.back(), snaps[k].z);
        double sep = min_separation(z.back());
        CVec zk(n);
        std::vector<CMat> bk;
        for (int i = 0; i < n; ++i) {
            zk(i) = snaps[k].z(perm[i]);
            if (std::abs(zk(i) - z.back()(i)) > sep / 3)
                throw TrackingLost("residue labels could not be matched between snapshots");
            bk.push_back(snaps[k].residues[perm[i]]);
        }
        z.push_back(zk);
        B.push_back(bk);
    }
    double worst = 0;
    for (std::size_t k = 2; k + 2 < snaps.size(); ++k) {
        std::array<CVec, 5> zs{z[k - 2], z[k - 1], z[k], z[k + 1], z[k + 2]};
        CVec dz = stencil_d1(zs, h);
        for (int i = 0; i < n; ++i) {
            std::array<CMat, 5> bs{B[k - 2][i], B[k - 1][i], B[k][i], B[k + 1][i], B[k + 2][i]};
            CMat dB = stencil_d1(bs, h);
            CMat rhs = CMat::Zero(n, n);
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                rhs += (B[k][j] * B[k][i] - B[k][i] * B[k][j]) * ((dz(i) - dz(j)) / (z[k](i) - z[k](j)));
            }
            worst = std::max(worst, (dB - rhs).norm());
        }
    }
    return worst;
}

SchlesingerRun schlesinger_along_path(const SaitoMatrices& m, const std::vector<cd>& lambda,
                                      const std::vector<std::vector<cd>>& points, cd z_seed, double h) {
    if (points.size() < 2) throw InsufficientSamples("a path needs at least 2 points");
    SaitoEvaluator ev(m);
    ZTracker zt(m.ring, points[0], z_seed);
    std::optional<Eigensystem> prev;
    SchlesingerRun run;
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto& p = points[k];
        const auto& a = k + 1 < points.size() ? points[k] : points[k - 1];
        const auto& b = k + 1 < points.size() ? points[k + 1] : points[k];
        std::vector<cd> d(p.size());
        double len = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            d[i] = b[i] - a[i];
            len += std::norm(d[i]);
        }
        len = std::sqrt(len);
        for (auto& x : d) x /= len;
        cd z = zt.at(p);
        auto centre = okubo_from_matrices(ev.T(p, z), ev.Btilde(p, z), lambda, prev ? &*prev : nullptr);
        prev = Eigensystem{centre.z, centre.P};
        std::vector<OkuboNumeric> snaps;
        for (int q = -2; q <= 2; ++q) {
            if (q == 0) {
                snaps.push_back(centre);
                continue;
            }
            ZTracker local = zt;
            auto x = lerp_point(p, d, q * h);
            cd zq = local.at(x);
            snaps.push_back(okubo_from_matrices(ev.T(x, zq), ev.Btilde(x, zq), lambda, &*prev));
        }
        double res = schlesinger_residual(snaps, h);
        run.residuals.push_back(res);
        run.max_residual = std::max(run.max_residual, res);
        run.traces.push_back(centre.r);
        for (int i = 0; i < centre.n; ++i)
            run.trace_drift = std::max(run.trace_drift, std::abs(centre.r[i] - run.traces[0][i]));
    }
    return run;
}

NormalForm okubo_normal_form(const std::vector<CMat>& residues, const CMat& Binf, double tol) {
    int n = static_cast<int>(Binf.rows());
    if (static_cast<int>(residues.size()) != n) throw FactorizationFailed("need one residue per diagonal entry");
    for (int i = 0; i < n; ++i) {
        if (std::abs(Binf(i, i)) < tol) throw FactorizationFailed("B'_inf has a zero diagonal entry");
        for (int j = 0; j < n; ++j)
            if (i != j && std::abs(Binf(i, j)) > tol) throw FactorizationFailed("B'_inf is not diagonal");
    }
    CMat sum = Binf;
    for (const auto& B : residues) sum += B;
    if (sum.norm() > 1e-8 * std::max(1.0, Binf.norm())) throw FactorizationFailed("residues do not sum to -B'_inf");

    CMat Binv = Binf.inverse();
    NormalForm nf{CMat(n, n), CMat(n, n), CMat(n, n)};
    for (int i = 0; i < n; ++i) {
        CMat M = -residues[i] * Binv;  // = b_i a_i
        Eigen::Index q, p;
        M.cwiseAbs().maxCoeff(&q, &p);
        if (std::abs(M(q, p)) == 0) throw FactorizationFailed("residue " + std::to_string(i + 1) + " vanishes");
        CVec b = M.col(p);
        Eigen::RowVectorXcd a = M.row(q) / M(q, p);
        if ((M - b * a).norm() > 1e-8 * M.norm())
            throw FactorizationFailed("residue " + std::to_string(i + 1) + " is not of rank one");
        nf.P.col(i) = b;
        nf.Pinv.row(i) = a;
    }
    if ((nf.Pinv * nf.P - CMat::Identity(n, n)).norm() > tol * 1e2)
        throw InverseMismatch("the a-rows do not invert the b-columns");
    nf.Bprime = nf.Pinv * Binf * nf.P;
    return nf;
}

JMSystem jm_build(cd y, cd ztilde, cd k, std::array<cd, 3> thetas, std::array<cd, 2> kappas, cd t) {
    auto [th0, th1, tht] = thetas;
    auto [k1, k2] = kappas;
    cd thinf = k1 - k2;
    if (std::abs(k1 + k2 + th0 + th1 + tht) > 1e-12)
        throw SchemaError("kappa1 + kappa2 + theta0 + theta1 + thetat must vanish");
    if (std::abs(thinf) < 1e-14) throw DegenerateTheta("theta_inf = kappa1 - kappa2 vanishes");
    if (std::abs(t) < 1e-14 || std::abs(t - 1.0) < 1e-14) throw PoleAtY("t meets 0 or 1");
    if (std::abs(y) < 1e-14 || std::abs(y - 1.0) < 1e-14 || std::abs(y - t) < 1e-14)
        throw PoleAtY("y meets 0, 1 or t");
    if (std::abs(k) < 1e-300) throw DegenerateTheta("k vanishes");

    cd zz = ztilde - th0 / y - th1 / (y - 1.0) - tht / (y - t);
    cd q = y * (y - 1.0) * (y - t) * zz * zz;
    cd z0 = y / (t * thinf) *
            (q + (th1 * (y - t) + t * tht * (y - 1.0) - 2.0 * k2 * (y - 1.0) * (y - t)) * zz +
             k2 * k2 * (y - t - 1.0) - k2 * (th1 + t * tht));
    cd z1 = -(y - 1.0) / ((t - 1.0) * thinf) *
            (q + ((th1 + thinf) * (y - t) + t * tht * (y - 1.0) - 2.0 * k2 * (y - 1.0) * (y - t)) * zz +
             k2 * k2 * (y - t) - k2 * (th1 + t * tht) - k1 * k2);
    cd zt = (y - t) / (t * (t - 1.0) * thinf) *
            (q + (th1 * (y - t) + t * (tht + thinf) * (y - 1.0) - 2.0 * k2 * (y - 1.0) * (y - t)) * zz +
             k2 * k2 * (y - 1.0) - k2 * (th1 + t * tht) - t * k1 * k2);
    if (std::abs(z0) < 1e-14 || std::abs(z1) < 1e-14 || std::abs(zt) < 1e-14)
        throw PoleAtY("a residue parameter z_i vanishes");

    JMSystem s;
    s.thetas = thetas;
    s.kappas = kappas;
    s.y = y;
    s.ztilde = ztilde;
    s.k = k;
    s.t = t;
    s.z0 = z0;
    s.z1 = z1;
    s.zt = zt;
    s.u = k * y / (t * z0);
    s.v = -k * (y - 1.0) / ((t - 1.0) * z1);
    s.w = k * (y - t) / (t * (t - 1.0) * zt);
    auto mk = [](cd zi, cd th, cd ui) {
        M2 A;
        A << zi + th, -ui * zi, (zi + th) / ui, -zi;
        return A;
    };
    s.A0 = mk(z0, th0, s.u);
    s.A1 = mk(z1, th1, s.v);
    s.At = mk(zt, tht, s.w);
    return s;
}

JMData jm_extract(const M2& A0, const M2& A1, const M2& At, std::array<cd, 3> thetas, cd t) {
    (void)thetas;
    cd uz0 = -A0(0, 1), vz1 = -A1(0, 1), wzt = -At(0, 1);
    JMData d;
    d.k = (t + 1.0) * uz0 + t * vz1 + wzt;
    if (std::abs(d.k) < 1e-300) throw DegenerateTheta("k vanishes");
    d.y = t * uz0 / d.k;
    d.ztilde = A0(0, 0) / d.y + A1(0, 0) / (d.y - 1.0) + At(0, 0) / (d.y - t);
    return d;
}

HamRhs p6_hamiltonian_rhs(const HamState& s, std::array<cd, 3> thetas, std::array<cd, 2> kappas) {
    auto [th0, th1, tht] = thetas;
    auto [k1, k2] = kappas;
    cd thinf = k1 - k2;
    cd y = s.y, z = s.ztilde, t = s.t;
    cd tt = t * (t - 1.0);
    HamRhs r;
    r.dy = y * (y - 1.0) * (y - t) / tt * (2.0 * z - th0 / y - th1 / (y - 1.0) - (tht - 1.0) / (y - t));
    r.dztilde = ((-3.0 * y * y + 2.0 * (1.0 + t) * y - t) * z * z +
                 ((2.0 * y - 1.0 - t) * th0 + (2.0 * y - t) * th1 + (2.0 * y - 1.0) * (tht - 1.0)) * z -
                 k1 * (k2 + 1.0)) /
                tt;
    r.dk = s.k * (thinf - 1.0) * (y - t) / tt;
    return r;
}

namespace {

HamState ham_advance(const HamState& from, cd to, std::array<cd, 3> th, std::array<cd, 2> ka) {
    cd dt = to - from.t;
    RhsFn f = [&](double s, const CVec& x) {
        HamState st{from.t + s * dt, x(0), x(1), x(2)};
        HamRhs r = p6_hamiltonian_rhs(st, th, ka);
        CVec out(3);
        out << r.dy * dt, r.dztilde * dt, r.dk * dt;
        return out;
    };
    auto guard = [&](const CVec& x) {
        if (!x.allFinite() || std::abs(x(0)) > 1e10 || std::abs(x(1)) > 1e10)
            throw BlowUp("Hamiltonian trajectory left every bounded region");
    };
    CVec x(3);
    x << from.y, from.ztilde, from.k;
    double step = std::min(1.0, 1e-2 / std::max(std::abs(dt), 1e-300));
    x = rk4_adaptive(f, x, 0.0, 1.0, 1e-12, std::max(step, 1e-6), nullptr, guard);
    HamState out{to, x(0), x(1), x(2)};
    if (std::abs(out.y) < 1e-8 || std::abs(out.y - 1.0) < 1e-8 || std::abs(out.y - out.t) < 1e-8)
        throw BlowUp("y approaches a pole of the Hamiltonian system");
    return out;
}

}  // namespace

std::vector<HamSample> integrate_p6_hamiltonian(std::array<cd, 3> thetas, std::array<cd, 2> kappas,
                                                const HamState& init, const std::vector<cd>& ts, double h) {
    std::vector<HamSample> out;
    HamState cur = init;
    for (cd t : ts) {
        if (std::abs(t) < 1e-8 || std::abs(t - 1.0) < 1e-8) throw BlowUp("t path meets 0 or 1");
        cur = ham_advance(cur, t, thetas, kappas);
        HamSample smp;
        smp.state = cur;
        smp.h = h;
        smp.stencil[2] = cur;
        std::array<cd, 5> dys;
        for (int q : {-2, -1, 1, 2}) smp.stencil[q + 2] = ham_advance(cur, t + double(q) * h, thetas, kappas);
        for (int q = 0; q < 5; ++q) dys[q] = p6_hamiltonian_rhs(smp.stencil[q], thetas, kappas).dy;
        smp.dy = dys[2];
        smp.d2y = stencil_d1(dys, h);
        out.push_back(smp);
    }
    return out;
}

double jm_schlesinger_residual(const std::array<JMSystem, 5>& s, double h) {
    std::array<M2, 5> a0, a1, at;
    for (int q = 0; q < 5; ++q) {
        a0[q] = s[q].A0;
        a1[q] = s[q].A1;
        at[q] = s[q].At;
    }
    const JMSystem& c = s[2];
    cd t = c.t;
    auto com = [](const M2& x, const M2& y) -> M2 { return x * y - y * x; };
    M2 r0 = stencil_d1(a0, h) - com(c.At, c.A0) / t;
    M2 r1 = stencil_d1(a1, h) - com(c.At, c.A1) / (t - 1.0);
    M2 rt = stencil_d1(at, h) - com(c.A0, c.At) / t - com(c.A1, c.At) / (t - 1.0);
    return std::max({r0.norm(), r1.norm(), rt.norm()});
}

JMCase random_jm_case(std::uint64_t seed, int samples) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> re(-0.45, 0.45), im(-0.1, 0.1), unit(0.0, 1.0);
    JMCase c;
    for (auto& th : c.thetas) th = cd(re(rng), im(rng));
    cd sum = c.thetas[0] + c.thetas[1] + c.thetas[2];
    do {
        c.kappas[0] = cd(re(rng), im(rng));
        c.kappas[1] = -(sum + c.kappas[0]);
    } while (std::abs(c.kappas[0] - c.kappas[1]) < 0.1);
    cd t0(0.3 + 0.1 * unit(rng), 0.05 + 0.1 * unit(rng));
    cd t1 = t0 + cd(0.1, 0.05 * unit(rng));
    c.init.t = t0;
    c.init.y = t0 + cd(0.2 + 0.2 * unit(rng), 0.2 + 0.2 * unit(rng));
    c.init.ztilde = cd(re(rng), im(rng));
    c.init.k = cd(0.5 + unit(rng), 0);
    for (int q = 0; q < samples; ++q) c.ts.push_back(t0 + (t1 - t0) * (double(q) / (samples - 1)));
    return c;
}

bool JMRoundTrip::passed(double residual_tol, double identity_tol) const {
    return pvi_residual < residual_tol && schlesinger_residual < residual_tol && trace_error < identity_tol &&
           ainf_error < identity_tol;
}

JMRoundTrip jm_round_trip(const JMCase& c, double h) {
    JMRoundTrip out;
    out.input = c;
    auto traj = integrate_p6_hamiltonian(c.thetas, c.kappas, c.init, c.ts, h);
    auto params = params_from_thetas(c.thetas[0], c.thetas[1], c.thetas[2], c.kappas[0] - c.kappas[1]);
    M2 kappa = M2::Zero();
    kappa(0, 0) = c.kappas[0];
    kappa(1, 1) = c.kappas[1];
    for (const auto& smp : traj) {
        const auto& st = smp.state;
        out.pvi_residual = std::max(out.pvi_residual, pvi_defect(st.t, st.y, smp.dy, smp.d2y, params));
        std::array<JMSystem, 5> sys;
        for (int q = 0; q < 5; ++q) {
            const auto& s = smp.stencil[q];
            sys[q] = jm_build(s.y, s.ztilde, s.k, c.thetas, c.kappas, s.t);
        }
        out.schlesinger_residual = std::max(out.schlesinger_residual, jm_schlesinger_residual(sys, smp.h));
        const JMSystem& s = sys[2];
        std::array<const M2*, 3> as{&s.A0, &s.A1, &s.At};
        for (int i = 0; i < 3; ++i) out.trace_error = std::max(out.trace_error, std::abs(as[i]->trace() - c.thetas[i]));
        out.ainf_error = std::max(out.ainf_error, (s.Ainf() - kappa).cwiseAbs().maxCoeff());
        ++out.steps;
    }
    return out;
}

}  // namespace flatstruct
