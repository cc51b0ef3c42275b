#include "lodegp/polymat.hpp"

#include <stdexcept>

namespace lodegp {

PolyMatrix::PolyMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("negative dimension");
  e_.assign(static_cast<size_t>(rows) * cols, Poly());
}

PolyMatrix PolyMatrix::identity(int n) {
  PolyMatrix m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = Poly(Rational(1));
  return m;
}

Poly& PolyMatrix::at(int i, int j) {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_) throw std::out_of_range("PolyMatrix::at");
  return e_[static_cast<size_t>(i) * cols_ + j];
}

const Poly& PolyMatrix::at(int i, int j) const {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_) throw std::out_of_range("PolyMatrix::at");
  return e_[static_cast<size_t>(i) * cols_ + j];
}

bool operator==(const PolyMatrix& a, const PolyMatrix& b) {
  return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.e_ == b.e_;
}

nlohmann::json PolyMatrix::to_json() const {
  nlohmann::json entries = nlohmann::json::array();
  for (int i = 0; i < rows_; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < cols_; ++j) row.push_back(at(i, j).str());
    entries.push_back(std::move(row));
  }
  return {{"rows", rows_}, {"cols", cols_}, {"entries", std::move(entries)}};
}

PolyMatrix PolyMatrix::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("entries"))
    throw std::invalid_argument("matrix JSON must have rows, cols, entries");
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("matrix dimensions must be positive");
  const auto& entries = j.at("entries");
  if (!entries.is_array() || static_cast<int>(entries.size()) != rows)
    throw std::invalid_argument("entries must have 'rows' rows");
  PolyMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const auto& row = entries.at(i);
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw std::invalid_argument("entries row " + std::to_string(i) +
                                  " must have 'cols' entries");
    for (int jx = 0; jx < cols; ++jx) {
      try {
        m.at(i, jx) = Poly::parse(row.at(jx).get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("entry (" + std::to_string(i) + "," +
                                    std::to_string(jx) + "): " + e.what());
      }
    }
  }
  return m;
}

PolyMatrix polymat_mul(const PolyMatrix& a, const PolyMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("polymat_mul: dimension mismatch");
  PolyMatrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      Poly acc;
      for (int k = 0; k < a.cols(); ++k) acc = acc + a.at(i, k) * b.at(k, j);
      c.at(i, j) = acc;
    }
  return c;
}

Poly unimodular_det(const PolyMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("determinant of non-square matrix");
  const int n = m.rows();
  if (n == 0) return Poly(Rational(1));
  // Bareiss fraction-free elimination; every division is exact in the ring.
  std::vector<std::vector<Poly>> a(n, std::vector<Poly>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[i][j] = m.at(i, j);
  Poly prev(Rational(1));
  int sign = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (a[k][k].is_zero()) {
      int swap_row = -1;
      for (int i = k + 1; i < n; ++i)
        if (!a[i][k].is_zero()) {
          swap_row = i;
          break;
        }
      if (swap_row < 0) return Poly();
      std::swap(a[k], a[swap_row]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j) {
        Poly num = a[i][j] * a[k][k] - a[i][k] * a[k][j];
        auto [q, r] = poly_divmod(num, prev);
        if (!r.is_zero()) throw std::logic_error("fraction-free elimination: inexact division");
        a[i][j] = q;
      }
    prev = a[k][k];
  }
  return sign < 0 ? -a[n - 1][n - 1] : a[n - 1][n - 1];
}

}  // namespace lodegp
