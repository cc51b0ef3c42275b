#pragma once

#include <json.hpp>
#include <vector>

#include "lodegp/poly.hpp"

namespace lodegp {

// Matrix over the polynomial ring, row-major dense storage.
class PolyMatrix {
 public:
  PolyMatrix() = default;
  PolyMatrix(int rows, int cols);
  static PolyMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Poly& at(int i, int j);
  const Poly& at(int i, int j) const;

  friend bool operator==(const PolyMatrix& a, const PolyMatrix& b);

  // File form: {"rows": m1, "cols": m0, "entries": [[string,...],...]}
  // with entries in the polynomial text grammar.
  nlohmann::json to_json() const;
  static PolyMatrix from_json(const nlohmann::json& j);

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<Poly> e_;
};

// Exact product. Throws std::invalid_argument on dimension mismatch.
PolyMatrix polymat_mul(const PolyMatrix& a, const PolyMatrix& b);

// Exact determinant via fraction-free elimination.
// Throws std::invalid_argument if the matrix is not square.
Poly unimodular_det(const PolyMatrix& m);

}  // namespace lodegp
