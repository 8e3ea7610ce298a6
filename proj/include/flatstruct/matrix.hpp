#pragma once

#include <vector>

#include "flatstruct/ring.hpp"

namespace flatstruct {

using ElemMatrix = std::vector<std::vector<Elem>>;

ElemMatrix zero_matrix(const RingPtr& r, int rows, int cols);
ElemMatrix identity_matrix(const RingPtr& r, int n);
ElemMatrix diagonal_matrix(const RingPtr& r, const std::vector<Rational>& d);

ElemMatrix operator+(const ElemMatrix& a, const ElemMatrix& b);
ElemMatrix operator-(const ElemMatrix& a, const ElemMatrix& b);
ElemMatrix operator*(const ElemMatrix& a, const ElemMatrix& b);
ElemMatrix scaled(const ElemMatrix& a, const Rational& c);
ElemMatrix scaled(const ElemMatrix& a, const Elem& c);
ElemMatrix commutator(const ElemMatrix& a, const ElemMatrix& b);
ElemMatrix transpose(const ElemMatrix& a);
ElemMatrix partial(const ElemMatrix& a, int var);

bool is_zero(const ElemMatrix& a);
bool equals(const ElemMatrix& a, const ElemMatrix& b);

// Laplace expansion over column subsets (exact, division free).
Elem determinant(const ElemMatrix& a);
// Sum over permutations; independent second algorithm.
Elem determinant_leibniz(const ElemMatrix& a);
ElemMatrix adjugate(const ElemMatrix& a);

std::vector<std::vector<cd>> evaluate(const ElemMatrix& a, const std::vector<cd>& t, cd z);

}  // namespace flatstruct
