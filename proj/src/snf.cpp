#include "lodegp/snf.hpp"

#include <stdexcept>

namespace lodegp {

namespace {

struct SnfState {
  PolyMatrix d, u, v;
  Rational det_u{1}, det_v{1};

  void swap_rows(int a, int b) {
    if (a == b) return;
    for (int j = 0; j < d.cols(); ++j) std::swap(d.at(a, j), d.at(b, j));
    for (int j = 0; j < u.cols(); ++j) std::swap(u.at(a, j), u.at(b, j));
    det_u = -det_u;
  }
  void swap_cols(int a, int b) {
    if (a == b) return;
    for (int i = 0; i < d.rows(); ++i) std::swap(d.at(i, a), d.at(i, b));
    for (int i = 0; i < v.rows(); ++i) std::swap(v.at(i, a), v.at(i, b));
    det_v = -det_v;
  }
  // row a -= q * row b
  void submul_row(int a, int b, const Poly& q) {
    if (q.is_zero()) return;
    for (int j = 0; j < d.cols(); ++j) d.at(a, j) = d.at(a, j) - q * d.at(b, j);
    for (int j = 0; j < u.cols(); ++j) u.at(a, j) = u.at(a, j) - q * u.at(b, j);
  }
  // col a -= q * col b
  void submul_col(int a, int b, const Poly& q) {
    if (q.is_zero()) return;
    for (int i = 0; i < d.rows(); ++i) d.at(i, a) = d.at(i, a) - q * d.at(i, b);
    for (int i = 0; i < v.rows(); ++i) v.at(i, a) = v.at(i, a) - q * v.at(i, b);
  }
  void scale_row(int a, const Rational& c) {
    for (int j = 0; j < d.cols(); ++j) d.at(a, j) = c * d.at(a, j);
    for (int j = 0; j < u.cols(); ++j) u.at(a, j) = c * u.at(a, j);
    det_u *= c;
  }

  // Minimal-degree nonzero pivot in d[t.., t..] bounded by (hi_row, hi_col);
  // ties go to the lowest row, then the lowest column.
  bool find_pivot(int t, int hi_row, int hi_col, int* pi, int* pj) const {
    int best_deg = -1;
    for (int i = t; i < hi_row; ++i)
      for (int j = t; j < hi_col; ++j) {
        const Poly& p = d.at(i, j);
        if (p.is_zero()) continue;
        if (best_deg < 0 || p.degree() < best_deg) {
          best_deg = p.degree();
          *pi = i;
          *pj = j;
        }
      }
    return best_deg >= 0;
  }

  // Euclidean reduction at diagonal slot t. Pivot search is bounded so the
  // same loop serves full-stage reduction and 2x2 divisibility fixes; row and
  // column operations always span the full matrix.
  // Returns false if the bounded submatrix is entirely zero.
  bool reduce_at(int t, int hi_row, int hi_col) {
    for (;;) {
      int pi, pj;
      if (!find_pivot(t, hi_row, hi_col, &pi, &pj)) return false;
      swap_rows(t, pi);
      swap_cols(t, pj);
      bool dirty = false;
      for (int i = t + 1; i < d.rows(); ++i) {
        if (d.at(i, t).is_zero()) continue;
        auto [q, r] = poly_divmod(d.at(i, t), d.at(t, t));
        submul_row(i, t, q);
        if (!r.is_zero()) dirty = true;
      }
      for (int j = t + 1; j < d.cols(); ++j) {
        if (d.at(t, j).is_zero()) continue;
        auto [q, r] = poly_divmod(d.at(t, j), d.at(t, t));
        submul_col(j, t, q);
        if (!r.is_zero()) dirty = true;
      }
      if (!dirty) return true;
    }
  }
};

bool divides(const Poly& a, const Poly& b) {
  if (b.is_zero()) return true;
  if (a.is_zero()) return false;
  return poly_divmod(b, a).second.is_zero();
}

}  // namespace

SNFDecomposition snf(const PolyMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) throw std::invalid_argument("snf of empty matrix");
  SnfState st;
  st.d = a;
  st.u = PolyMatrix::identity(a.rows());
  st.v = PolyMatrix::identity(a.cols());

  const int rank_bound = std::min(a.rows(), a.cols());
  int rank = 0;
  for (int t = 0; t < rank_bound; ++t) {
    if (!st.reduce_at(t, a.rows(), a.cols())) break;
    ++rank;
  }

  // d_i | d_{i+1} via the 2x2 block trick; a fix at one slot can break the
  // previous pair, so sweep until stable.
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i + 1 < rank; ++i) {
      if (divides(st.d.at(i, i), st.d.at(i + 1, i + 1))) continue;
      st.submul_col(i, i + 1, Poly(Rational(-1)));
      st.reduce_at(i, i + 2, i + 2);
      changed = true;
    }
  }

  for (int i = 0; i < rank; ++i) {
    const Poly& di = st.d.at(i, i);
    if (di.leading() != 1) st.scale_row(i, Rational(1) / di.leading());
  }

  return SNFDecomposition{st.u, st.d, st.v, st.det_u, st.det_v};
}

bool snf_verify(const PolyMatrix& a, const SNFDecomposition& s) {
  if (s.u.rows() != a.rows() || s.u.cols() != a.rows()) return false;
  if (s.v.rows() != a.cols() || s.v.cols() != a.cols()) return false;
  if (s.d.rows() != a.rows() || s.d.cols() != a.cols()) return false;
  if (!(polymat_mul(polymat_mul(s.u, a), s.v) == s.d)) return false;
  Poly prev;
  for (int i = 0; i < s.d.rows(); ++i)
    for (int j = 0; j < s.d.cols(); ++j) {
      const Poly& e = s.d.at(i, j);
      if (i != j && !e.is_zero()) return false;
      if (i != j) continue;
      if (!e.is_zero() && e.leading() != 1) return false;
      if (i > 0 && !divides(prev, e)) return false;
      prev = e;
    }
  const Poly du = unimodular_det(s.u);
  const Poly dv = unimodular_det(s.v);
  if (!du.is_constant() || du.is_zero() || du.coeff(0) != s.det_u) return false;
  if (!dv.is_constant() || dv.is_zero() || dv.coeff(0) != s.det_v) return false;
  return true;
}

}  // namespace lodegp
