#pragma once

#include <json.hpp>
#include <vector>

#include "lodegp/poly.hpp"

namespace lodegp {

enum class Trig { none, cos, sin };

// One summand of a covariance expression:
//   c * t1^p * t2^q * exp(alpha*t1 + beta*t2)
//     * {cos|sin}(b*(t1 - t2))            (optional)
//     * exp(-(t1 - t2)^2 / (2*ell2))      (optional)
// The family is closed under d/dt1 and d/dt2.
struct Term {
  double c = 1.0;
  int p = 0, q = 0;
  double alpha = 0.0, beta = 0.0;
  Trig trig = Trig::none;
  double b = 0.0;
  bool gauss = false;
  double ell2 = 0.0;

  double eval(double t1, double t2) const;
  // Equal factor structure (everything except the coefficient).
  bool same_shape(const Term& o) const;
};

class KernelExpr {
 public:
  KernelExpr() = default;  // zero expression
  explicit KernelExpr(std::vector<Term> terms);
  static KernelExpr constant(double c);
  static KernelExpr se(double ell2, double sigma2);

  const std::vector<Term>& terms() const { return t_; }
  bool is_zero() const { return t_.empty(); }
  double eval(double t1, double t2) const;

  friend KernelExpr operator+(const KernelExpr& a, const KernelExpr& b);
  friend KernelExpr operator*(double s, const KernelExpr& k);

  nlohmann::json to_json() const;

 private:
  std::vector<Term> t_;
  // Merge same-shape terms, prune |c| < 1e-300, sort canonically.
  void normalize();
};

// arg is 1 or 2; order 0 returns the input unchanged.
KernelExpr kexpr_diff(const KernelExpr& k, int arg, int order);

// sum_i coeff_i(p) * d^i/d(arg)^i k, coefficients cast to double.
KernelExpr apply_operator_poly(const Poly& p, const KernelExpr& k, int arg);

}  // namespace lodegp
