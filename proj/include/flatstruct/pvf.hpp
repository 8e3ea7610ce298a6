#pragma once

#include <map>
#include <string>
#include <vector>

#include "flatstruct/ring.hpp"

namespace flatstruct {

// Weights (w_1..w_n) and the potential vector field g = (g_1..g_n).
struct PotentialVF {
    std::string name;
    RingPtr ring;
    std::vector<Elem> g;
    std::map<std::string, std::string> meta;

    int n() const { return ring ? ring->n() : 0; }
    const std::vector<Rational>& weights() const { return ring->weights(); }
};

// Pairwise weight differences must not be integers (needed by the flat-structure checks).
bool weight_differences_nonintegral(const std::vector<Rational>& w);

}  // namespace flatstruct
