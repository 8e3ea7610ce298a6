#include "flatstruct/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace flatstruct {

SaitoEvaluator::SaitoEvaluator(const SaitoMatrices& m) : n_(m.n()), ring_(m.ring), w_(m.Binf) {
    std::vector<Elem> t, b;
    for (const auto& row : m.T)
        for (const auto& e : row) t.push_back(e);
    for (const auto& mat : m.Btilde)
        for (const auto& row : mat)
            for (const auto& e : row) b.push_back(e);
    T_ = Evaluator(ring_, t);
    B_ = Evaluator(ring_, b);
}

CMat SaitoEvaluator::T(const std::vector<cd>& t, cd z) const {
    auto v = T_(t, z);
    CMat out(n_, n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) out(i, j) = v[i * n_ + j];
    return out;
}

std::vector<CMat> SaitoEvaluator::Btilde(const std::vector<cd>& t, cd z) const {
    auto v = B_(t, z);
    std::vector<CMat> out(n_, CMat(n_, n_));
    for (int k = 0; k < n_; ++k)
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) out[k](i, j) = v[(k * n_ + i) * n_ + j];
    return out;
}

ZTracker::ZTracker(RingPtr ring, const std::vector<cd>& t0, cd seed) : ring_(std::move(ring)) {
    if (ring_->has_extension()) tracker_.emplace(ring_, t0, seed);
}

cd ZTracker::at(const std::vector<cd>& t) { return tracker_ ? tracker_->move_to(t) : cd(0); }

cd ZTracker::z() const { return tracker_ ? tracker_->z() : cd(0); }

double min_separation(const CVec& z) {
    double sep = std::numeric_limits<double>::infinity();
    for (int i = 0; i < z.size(); ++i)
        for (int j = i + 1; j < z.size(); ++j) sep = std::min(sep, std::abs(z(i) - z(j)));
    return sep;
}

bool root_less(cd a, cd b, double scale) {
    if (std::abs(a.real() - b.real()) > 1e-9 * scale) return a.real() < b.real();
    return a.imag() < b.imag();
}

Eigensystem eigensystem(const CMat& T, double separation) {
    Eigen::ComplexEigenSolver<CMat> es(T);
    if (es.info() != Eigen::Success) throw EigenvalueCollision("eigen decomposition failed");
    int n = static_cast<int>(T.rows());
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    const CVec& ev = es.eigenvalues();
    double sc = std::max(1.0, ev.cwiseAbs().maxCoeff());
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return root_less(ev(a), ev(b), sc); });
    Eigensystem out{CVec(n), CMat(n, n)};
    for (int k = 0; k < n; ++k) {
        out.z(k) = ev(idx[k]);
        out.P.col(k) = es.eigenvectors().col(idx[k]);
    }
    double scale = std::max(1.0, out.z.cwiseAbs().maxCoeff());
    if (min_separation(out.z) < separation * scale)
        throw EigenvalueCollision("eigenvalues closer than " + std::to_string(separation));
    return out;
}

std::vector<int> match_points(const CVec& a, const CVec& b) {
    int n = static_cast<int>(a.size());
    std::vector<int> perm(n), best;
    std::iota(perm.begin(), perm.end(), 0);
    if (n > 8) {
        // Greedy for large n; the catalog works with n <= 4.
        std::vector<bool> used(n, false);
        for (int i = 0; i < n; ++i) {
            int arg = -1;
            for (int j = 0; j < n; ++j)
                if (!used[j] && (arg < 0 || std::abs(a(i) - b(j)) < std::abs(a(i) - b(arg)))) arg = j;
            used[arg] = true;
            perm[i] = arg;
        }
        return perm;
    }
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double c = 0;
        for (int i = 0; i < n; ++i) c += std::abs(a(i) - b(perm[i]));
        if (c < best_cost) {
            best_cost = c;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

Eigensystem reorder(const Eigensystem& e, const std::vector<int>& perm) {
    int n = static_cast<int>(perm.size());
    Eigensystem out{CVec(n), CMat(e.P.rows(), n)};
    for (int i = 0; i < n; ++i) {
        out.z(i) = e.z(perm[i]);
        out.P.col(i) = e.P.col(perm[i]);
    }
    return out;
}

Eigensystem track_eigensystem(const Eigensystem& prev, const CMat& T, double separation) {
    Eigensystem now = eigensystem(T, separation);
    auto perm = match_points(prev.z, now.z);
    Eigensystem out = reorder(now, perm);
    double sep = min_separation(prev.z);
    for (int i = 0; i < out.z.size(); ++i)
        if (std::abs(out.z(i) - prev.z(i)) > sep / 3)
            throw TrackingLost("eigenvalue moved by more than a third of the separation");
    return out;
}

namespace {

CVec rk4_step(const RhsFn& f, double s, const CVec& y, double h) {
    CVec k1 = f(s, y);
    CVec k2 = f(s + h / 2, y + (h / 2) * k1);
    CVec k3 = f(s + h / 2, y + (h / 2) * k2);
    CVec k4 = f(s + h, y + h * k3);
    return y + (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

CVec rk4_adaptive(const RhsFn& f, CVec y, double s0, double s1, double tol, double max_step, long* steps,
                  const std::function<void(const CVec&)>& guard) {
    double span = s1 - s0;
    if (span == 0) return y;
    double dir = span > 0 ? 1.0 : -1.0;
    double s = s0;
    double h = std::min(max_step, std::abs(span));
    while (dir * (s1 - s) > 0) {
        if (std::abs(s1 - s) <= 1e-14 * std::abs(span)) break;
        h = std::min(h, std::abs(s1 - s));
        if (h < 1e-12) throw StepUnderflow("step size fell below 1e-12");
        CVec full = rk4_step(f, s, y, dir * h);
        CVec half = rk4_step(f, s, y, dir * h / 2);
        half = rk4_step(f, s + dir * h / 2, half, dir * h / 2);
        double err = 0;
        for (int i = 0; i < y.size(); ++i)
            err = std::max(err, std::abs(full(i) - half(i)) / std::max(1.0, std::abs(half(i))));
        if (!std::isfinite(err)) {
            h /= 2;
            continue;
        }
        if (err > tol * h) {
            h /= 2;
            continue;
        }
        // Richardson extrapolation of the two estimates.
        y = half + (half - full) / 15.0;
        s += dir * h;
        if (steps) ++*steps;
        if (guard) guard(y);
        if (err < tol * h / 32) h = std::min(2 * h, max_step);
    }
    return y;
}

std::vector<cd> to_complex(const std::vector<double>& v) { return {v.begin(), v.end()}; }

std::vector<cd> lerp_point(const std::vector<cd>& a, const std::vector<cd>& d, double s) {
    std::vector<cd> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * d[i];
    return out;
}

}  // namespace flatstruct
