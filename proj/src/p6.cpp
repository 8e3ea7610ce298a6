#include "flatstruct/p6.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace flatstruct {

P6Params params_from_thetas(cd theta0, cd theta1, cd thetat, cd thetainf) {
    P6Params p;
    p.theta0 = theta0;
    p.theta1 = theta1;
    p.thetat = thetat;
    p.thetainf = thetainf;
    p.alpha = 0.5 * (thetainf - 1.0) * (thetainf - 1.0);
    p.beta = -0.5 * theta0 * theta0;
    p.gamma = 0.5 * theta1 * theta1;
    p.delta = 0.5 * (1.0 - thetat * thetat);
    return p;
}

namespace {

void require_rank3(const SaitoMatrices& m) {
    if (m.n() != 3) throw SchemaError("Painleve VI extraction needs n = 3, got " + std::to_string(m.n()));
}

std::vector<cd> full_point(const std::vector<cd>& tprime) {
    if (tprime.size() != 2) throw SchemaError("a base point needs (t1, t2)");
    return {tprime[0], tprime[1], cd(0)};
}

CMat lambda_matrix(const std::vector<cd>& lambda) {
    CMat L = CMat::Zero(3, 3);
    for (int i = 0; i < 3; ++i) L(i, i) = lambda[i];
    return L;
}

std::array<cd, 3> traces(const Eigensystem& e, const CMat& L) {
    CMat Q = e.P.inverse() * L * e.P;
    return {-Q(0, 0), -Q(1, 1), -Q(2, 2)};
}

P6Params params_for(const std::array<cd, 3>& r, const std::vector<cd>& lambda, std::pair<int, int> entry) {
    auto [i, j] = entry;
    int k = 3 - i - j;
    P6Params p = params_from_thetas(r[0] + lambda[k], r[1] + lambda[k], r[2] + lambda[k], lambda[i] - lambda[j]);
    p.r = r;
    return p;
}

void check_entry(std::pair<int, int> entry) {
    auto [i, j] = entry;
    if (i < 0 || i > 2 || j < 0 || j > 2 || i == j)
        throw SchemaError("entry must be an off-diagonal (i, j) with 1 <= i, j <= 3");
}

// State along the path: eigen labels and the generator root.
struct Local {
    Eigensystem eig;
    cd y, t;
    std::array<cd, 3> r;
};

class Extractor {
public:
    Extractor(const SaitoMatrices& m, const std::vector<cd>& lambda, std::pair<int, int> entry)
        : eval_(m), lambda_(lambda), L_(lambda_matrix(lambda)) {
        auto [i, j] = entry;
        ElemMatrix adj = adjugate(scaled(m.T, Rational(-1)));
        Elem e = adj[i][j];
        if (e.is_zero() || lambda[j] == cd(0))
            throw EntryIdenticallyZero("entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                       ") of h B(3) vanishes identically");
        if (degree_tn(e) > 1)
            throw DegenerateLinearEntry("entry is not linear in t3");
        lin_ = Evaluator(m.ring, {coeff_tn(e, 0), coeff_tn(e, 1)});
        DivisorData d = discriminant(m);
        std::vector<Elem> hc;
        for (int k = 0; k <= 3; ++k) hc.push_back(coeff_tn(d.h, k));
        hcoef_ = Evaluator(m.ring, hc);
    }

    Local at(const std::vector<cd>& tprime, cd z, const Eigensystem* prev) const {
        auto t = full_point(tprime);
        CMat T0 = eval_.T(t, z);
        Local out;
        out.eig = prev ? track_eigensystem(*prev, T0) : eigensystem(T0);
        polish(out.eig.z, hcoef_(t, z));
        auto ab = lin_(t, z);
        double scale = std::max(1.0, std::abs(ab[0]));
        if (std::abs(ab[1]) < 1e-12 * scale)
            throw DegenerateLinearEntry("t3 coefficient of the entry vanishes");
        cd zij = -ab[0] / ab[1];
        const CVec& r = out.eig.z;
        out.y = (zij - r(0)) / (r(1) - r(0));
        out.t = (r(2) - r(0)) / (r(1) - r(0));
        out.r = traces(out.eig, L_);
        return out;
    }

    // Tracks labels from (from, state) to target, subdividing the segment when needed.
    Local move(const std::vector<cd>& from, const Local& state, const std::vector<cd>& target, ZTracker& zt) const {
        std::vector<cd> d(from.size());
        for (std::size_t k = 0; k < d.size(); ++k) d[k] = target[k] - from[k];
        for (int pieces = 1; pieces <= 4096; pieces *= 2) {
            ZTracker ztry = zt;
            try {
                Local cur = state;
                for (int s = 1; s <= pieces; ++s) {
                    auto p = lerp_point(from, d, static_cast<double>(s) / pieces);
                    cd z = ztry.at(full_point(p));
                    cur = at(p, z, &cur.eig);
                }
                zt = ztry;
                return cur;
            } catch (const TrackingLost&) {
            }
        }
        throw TrackingLost("root labels could not be followed along the path");
    }

    const SaitoEvaluator& evaluator() const { return eval_; }

private:
    // Newton steps on the cubic h(t3); eigenvalues alone are not accurate enough for second differences.
    static void polish(CVec& z, const std::vector<cd>& c) {
        for (int i = 0; i < z.size(); ++i)
            for (int it = 0; it < 3; ++it) {
                cd p = c[3], dp = 0;
                for (int k = 2; k >= 0; --k) {
                    dp = dp * z(i) + p;
                    p = p * z(i) + c[k];
                }
                if (dp == cd(0)) break;
                z(i) -= p / dp;
            }
    }

    SaitoEvaluator eval_;
    std::vector<cd> lambda_;
    CMat L_;
    Evaluator lin_;
    Evaluator hcoef_;
};

double norm(const std::vector<cd>& v) {
    double s = 0;
    for (auto x : v) s += std::norm(x);
    return std::sqrt(s);
}

}  // namespace

std::array<cd, 3> roots_of_h(const DivisorData& d, const std::vector<cd>& tprime, cd z_seed, double separation) {
    if (d.n != 3) throw SchemaError("roots_of_h needs a cubic divisor");
    const RingPtr& r = d.h.ring();
    auto t = full_point(tprime);
    cd z = r->has_extension() ? solve_root(*r, t, z_seed) : cd(0);
    std::vector<Elem> coeffs;
    for (int k = 0; k <= 3; ++k) coeffs.push_back(coeff_tn(d.h, k));
    auto c = Evaluator(r, coeffs)(t, z);
    CMat comp = CMat::Zero(3, 3);
    for (int i = 0; i < 3; ++i) comp(i, 2) = -c[i] / c[3];
    comp(1, 0) = comp(2, 1) = 1;
    Eigen::ComplexEigenSolver<CMat> es(comp, false);
    CVec ev = es.eigenvalues();
    std::array<cd, 3> out{ev(0), ev(1), ev(2)};
    double scale = std::max({1.0, std::abs(out[0]), std::abs(out[1]), std::abs(out[2])});
    std::sort(out.begin(), out.end(), [scale](cd a, cd b) { return root_less(a, b, scale); });
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (std::abs(out[i] - out[j]) < separation * scale)
                throw RootCollision("roots of h collide at the given point");
    return out;
}

std::array<cd, 3> roots_of_h(const SaitoMatrices& m, const std::vector<cd>& tprime, cd z_seed, double separation) {
    require_rank3(m);
    return roots_of_h(discriminant(m), tprime, z_seed, separation);
}

P6Params p6_parameters(const SaitoMatrices& m, const std::vector<cd>& tprime, const std::vector<cd>& lambda,
                       std::pair<int, int> entry, cd z_seed, std::array<int, 3> order) {
    require_rank3(m);
    check_entry(entry);
    SaitoEvaluator ev(m);
    auto t = full_point(tprime);
    cd z = m.ring->has_extension() ? solve_root(*m.ring, t, z_seed) : cd(0);
    Eigensystem e = reorder(eigensystem(ev.T(t, z)), {order[0], order[1], order[2]});
    return params_for(traces(e, lambda_matrix(lambda)), lambda, entry);
}

P6Run extract_p6_solution(const SaitoMatrices& m, const std::vector<cd>& lambda, std::pair<int, int> entry,
                          const P6Path& path, std::array<int, 3> first_order) {
    require_rank3(m);
    check_entry(entry);
    if (lambda.size() != 3) throw SchemaError("three B_inf eigenvalues are required");
    if (path.points.size() < 2) throw InsufficientSamples("a path needs at least two points");
    Extractor ex(m, lambda, entry);

    P6Run run;
    run.entry = entry;
    run.lambda = lambda;
    run.first_order = first_order;

    const auto& pts = path.points;
    ZTracker zt(m.ring, full_point(pts[0]), path.z_seed);
    Local first = ex.at(pts[0], zt.z(), nullptr);
    first.eig = reorder(first.eig, {first_order[0], first_order[1], first_order[2]});
    first = ex.at(pts[0], zt.z(), &first.eig);

    Local cur = first;
    double s = 0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        if (k > 0) {
            cur = ex.move(pts[k - 1], cur, pts[k], zt);
            std::vector<cd> diff(pts[k].size());
            for (std::size_t q = 0; q < diff.size(); ++q) diff[q] = pts[k][q] - pts[k - 1][q];
            s += norm(diff);
        }
        // Local direction of the path.
        const auto& a = pts[k == 0 ? 0 : k - 1];
        const auto& b = pts[k + 1 < pts.size() ? k + 1 : k];
        std::vector<cd> dir(a.size());
        for (std::size_t q = 0; q < dir.size(); ++q) dir[q] = b[q] - a[q];
        double dn = norm(dir);
        if (dn == 0) throw InsufficientSamples("repeated path point");
        for (auto& x : dir) x /= dn;

        auto stencil = [&](double h) {
            std::array<Local, 5> loc;
            loc[2] = cur;
            for (int q : {-2, -1, 1, 2}) {
                ZTracker zq = zt;
                loc[q + 2] = ex.move(pts[k], cur, lerp_point(pts[k], dir, q * h), zq);
            }
            return loc;
        };
        // Step chosen so that |dt| per step is about 2e-3, inside [1e-3, 1e-2].
        double h = path.step > 0 ? path.step : 4e-3;
        std::array<Local, 5> loc = stencil(h);
        for (int iter = 0; path.step <= 0 && iter < 6; ++iter) {
            double dt = std::abs(loc[3].t - loc[2].t);
            if (dt == 0) throw TrackingLost("dt/ds vanishes along the path");
            if (dt >= 1.5e-3 && dt <= 3e-3) break;
            h = std::min(h * 2e-3 / dt, 5e-2);
            loc = stencil(h);
        }
        std::array<cd, 5> ys, ts;
        for (int q = 0; q < 5; ++q) {
            ys[q] = loc[q].y;
            ts[q] = loc[q].t;
        }
        cd ys1 = stencil_d1(ys, h), ys2 = stencil_d2(ys, h);
        cd ts1 = stencil_d1(ts, h), ts2 = stencil_d2(ts, h);
        if (std::abs(ts1) < 1e-12) throw TrackingLost("dt/ds vanishes along the path");

        P6Sample smp;
        smp.s = s;
        smp.point = pts[k];
        for (int q = 0; q < 3; ++q) smp.z[q] = cur.eig.z(q);
        smp.r = cur.r;
        smp.t = cur.t;
        smp.y = cur.y;
        smp.dy = ys1 / ts1;
        smp.d2y = (ys2 - smp.dy * ts2) / (ts1 * ts1);
        run.samples.push_back(smp);
    }
    run.params = params_for(run.samples.front().r, lambda, entry);
    p6_residual(run.samples, run.params);
    return run;
}

double pvi_defect(cd t, cd y, cd dy, cd d2y, const P6Params& p) {
    if (std::abs(y) < 1e-14 || std::abs(y - 1.0) < 1e-14 || std::abs(y - t) < 1e-14)
        throw PoleAtY("y meets 0, 1 or t");
    cd rhs = 0.5 * (1.0 / y + 1.0 / (y - 1.0) + 1.0 / (y - t)) * dy * dy -
             (1.0 / t + 1.0 / (t - 1.0) + 1.0 / (y - t)) * dy +
             y * (y - 1.0) * (y - t) / (t * t * (t - 1.0) * (t - 1.0)) *
                 (p.alpha + p.beta * t / (y * y) + p.gamma * (t - 1.0) / ((y - 1.0) * (y - 1.0)) +
                  p.delta * t * (t - 1.0) / ((y - t) * (y - t)));
    return std::abs(d2y - rhs);
}

double p6_residual(std::vector<P6Sample>& samples, const P6Params& params) {
    if (samples.size() < 5) throw InsufficientSamples("at least 5 samples are required");
    double worst = 0;
    for (auto& s : samples) {
        s.residual = pvi_defect(s.t, s.y, s.dy, s.d2y, params);
        worst = std::max(worst, s.residual);
    }
    return worst;
}

namespace {

std::string fmt(cd v) {
    std::ostringstream os;
    os << std::setprecision(17) << v.real() << (v.imag() < 0 ? "-" : "+") << std::abs(v.imag()) << "j";
    return os.str();
}

}  // namespace

std::string samples_to_csv(const std::vector<P6Sample>& samples) {
    std::ostringstream os;
    os << "s,t1,t2,t,y,dy,d2y,residual\n";
    for (const auto& s : samples) {
        os << std::setprecision(17) << s.s << ',' << fmt(s.point[0]) << ',' << fmt(s.point[1]) << ','
           << fmt(s.t) << ',' << fmt(s.y) << ',' << fmt(s.dy) << ',' << fmt(s.d2y) << ','
           << std::setprecision(6) << s.residual << '\n';
    }
    return os.str();
}

}  // namespace flatstruct
