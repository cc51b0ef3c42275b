#pragma once

#include "lodegp/polymat.hpp"

namespace lodegp {

// Smith decomposition U*A*V = D with U, V unimodular (constant nonzero
// determinant), D diagonal-shape with monic entries and d_i | d_{i+1}.
struct SNFDecomposition {
  PolyMatrix u;  // m1 x m1
  PolyMatrix d;  // m1 x m0
  PolyMatrix v;  // m0 x m0
  Rational det_u;
  Rational det_v;
};

// Euclidean row/column reduction with deterministic pivoting: the nonzero
// entry of minimal degree wins, ties broken by lowest row then lowest column.
// Divisibility chain enforced afterwards on 2x2 diagonal blocks; diagonal made
// monic by unit row scalings folded into U. Throws on empty input.
SNFDecomposition snf(const PolyMatrix& a);

// Exact check of all decomposition invariants against the original matrix.
bool snf_verify(const PolyMatrix& a, const SNFDecomposition& s);

}  // namespace lodegp
