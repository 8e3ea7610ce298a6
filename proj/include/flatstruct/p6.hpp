#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "flatstruct/logvf.hpp"
#include "flatstruct/numeric.hpp"

namespace flatstruct {

struct P6Params {
    cd theta0, theta1, thetat, thetainf;
    cd alpha, beta, gamma, delta;
    std::array<cd, 3> r{};  // residue traces in root order
};

P6Params params_from_thetas(cd theta0, cd theta1, cd thetat, cd thetainf);

struct P6Sample {
    double s = 0;            // path parameter (accumulated distance)
    std::vector<cd> point;   // (t1, t2)
    std::array<cd, 3> z{};   // roots of h in t3, tracked labels
    std::array<cd, 3> r{};   // residue traces at this point
    cd t, y, dy, d2y;
    double residual = 0;
};

struct P6Path {
    std::vector<std::vector<cd>> points;  // each (t1, t2)
    cd z_seed = 0;                        // initial generator root for extension rings
    double step = 0;                      // stencil step in the path parameter; 0 picks it from |dt|
};

struct P6Run {
    std::pair<int, int> entry;  // 0-based (i, j)
    std::vector<cd> lambda;
    P6Params params;             // from the first sample
    std::array<int, 3> first_order{};  // labels at the first point as indices into the sorted roots
    std::vector<P6Sample> samples;
};

// Roots of h(t', .) in t3, ascending real part then imaginary part.
std::array<cd, 3> roots_of_h(const DivisorData& d, const std::vector<cd>& tprime, cd z_seed = 0,
                             double separation = 1e-9);
std::array<cd, 3> roots_of_h(const SaitoMatrices& m, const std::vector<cd>& tprime, cd z_seed = 0,
                             double separation = 1e-9);

// entry is 0-based; roots in sorted order unless order is given (indices into the sorted roots).
P6Params p6_parameters(const SaitoMatrices& m, const std::vector<cd>& tprime, const std::vector<cd>& lambda,
                       std::pair<int, int> entry, cd z_seed = 0, std::array<int, 3> order = {0, 1, 2});

P6Run extract_p6_solution(const SaitoMatrices& m, const std::vector<cd>& lambda, std::pair<int, int> entry,
                          const P6Path& path, std::array<int, 3> first_order = {0, 1, 2});

double pvi_defect(cd t, cd y, cd dy, cd d2y, const P6Params& p);
// Fills residual on every sample and returns the maximum.
double p6_residual(std::vector<P6Sample>& samples, const P6Params& params);

std::string samples_to_csv(const std::vector<P6Sample>& samples);

}  // namespace flatstruct
