#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "flatstruct/flatcore.hpp"

namespace flatstruct {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// Numeric values of T and the B~(k) at points of the base space.
class SaitoEvaluator {
public:
    SaitoEvaluator() = default;
    explicit SaitoEvaluator(const SaitoMatrices& m);

    int n() const { return n_; }
    const RingPtr& ring() const { return ring_; }
    const std::vector<Rational>& weights() const { return w_; }

    CMat T(const std::vector<cd>& t, cd z) const;
    std::vector<CMat> Btilde(const std::vector<cd>& t, cd z) const;

private:
    int n_ = 0;
    RingPtr ring_;
    std::vector<Rational> w_;
    Evaluator T_;
    Evaluator B_;
};

// Follows the extension generator along a path; trivial for plain rings.
class ZTracker {
public:
    ZTracker(RingPtr ring, const std::vector<cd>& t0, cd seed);
    cd at(const std::vector<cd>& t);
    cd z() const;

private:
    RingPtr ring_;
    std::optional<RootTracker> tracker_;
};

struct Eigensystem {
    CVec z;  // eigenvalues
    CMat P;  // columns are eigenvectors, P^{-1} T P = diag(z)
};

// Ascending real part; real parts within 1e-9 relative count as ties, broken by imaginary part.
bool root_less(cd a, cd b, double scale);

// Eigenvalues ordered by root_less.
Eigensystem eigensystem(const CMat& T, double separation = 1e-9);
double min_separation(const CVec& z);

// Permutation perm with b[perm[i]] closest to a[i]; minimizes the total distance.
std::vector<int> match_points(const CVec& a, const CVec& b);
Eigensystem reorder(const Eigensystem& e, const std::vector<int>& perm);
// Eigensystem of T labelled consistently with prev; throws TrackingLost when ambiguous.
Eigensystem track_eigensystem(const Eigensystem& prev, const CMat& T, double separation = 1e-9);

// Five point stencil on equally spaced values f(-2h..2h).
template <class V>
V stencil_d1(const std::array<V, 5>& f, double h) {
    return (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h);
}
template <class V>
V stencil_d2(const std::array<V, 5>& f, double h) {
    return (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h);
}

// Classical RK4 on [s0, s1] with step doubling: a step is accepted when the
// scaled difference between one step and two half steps is below tol * h.
using RhsFn = std::function<CVec(double, const CVec&)>;
CVec rk4_adaptive(const RhsFn& f, CVec y, double s0, double s1, double tol, double max_step, long* steps = nullptr,
                  const std::function<void(const CVec&)>& guard = {});

std::vector<cd> to_complex(const std::vector<double>& v);
std::vector<cd> lerp_point(const std::vector<cd>& a, const std::vector<cd>& d, double s);

}  // namespace flatstruct
