#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "lodegp/rational.hpp"

namespace lodegp {

// Univariate polynomial in the differential operator (indeterminate token
// "Dt"), dense coefficient list in ascending degree, exact rationals.
// Canonical form: no trailing zero coefficient; zero is the empty list.
class Poly {
 public:
  Poly() = default;
  explicit Poly(const Rational& constant);
  explicit Poly(std::vector<Rational> coeffs);

  // c * Dt^power
  static Poly dt(int power = 1, const Rational& c = Rational(1));

  bool is_zero() const { return c_.empty(); }
  // -1 for the zero polynomial.
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  // Zero outside the stored range.
  const Rational& coeff(int i) const;
  const std::vector<Rational>& coeffs() const { return c_; }
  const Rational& leading() const;
  bool is_constant() const { return c_.size() <= 1; }
  bool is_one() const { return c_.size() == 1 && c_[0] == 1; }

  Poly monic() const;

  Poly operator-() const;
  friend Poly operator+(const Poly& a, const Poly& b);
  friend Poly operator-(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Poly& b);
  friend Poly operator*(const Rational& s, const Poly& p);
  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  std::complex<double> eval(const std::complex<double>& x) const;
  std::vector<double> coeffs_double() const;

  // Text grammar: "3/2*Dt^2 - Dt + 1", whitespace-insensitive.
  std::string str() const;
  // Throws std::invalid_argument with a column offset on malformed input.
  static Poly parse(const std::string& text);

 private:
  std::vector<Rational> c_;
  void normalize();
};

// Euclidean division: a = q*b + r with deg r < deg b or r = 0.
// Throws std::invalid_argument if b is zero.
std::pair<Poly, Poly> poly_divmod(const Poly& a, const Poly& b);

// Monic gcd; gcd(a, 0) = monic(a). Throws if both inputs are zero.
Poly poly_gcd(const Poly& a, const Poly& b);

}  // namespace lodegp
