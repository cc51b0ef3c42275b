#include "lodegp/poly.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

namespace lodegp {

std::string rational_str(const Rational& r) {
  std::ostringstream os;
  os << numerator(r);
  if (denominator(r) != 1) os << "/" << denominator(r);
  return os.str();
}

Rational rational_parse(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  for (char ch : s) {
    if (!std::isdigit(static_cast<unsigned char>(ch)) && ch != '-' && ch != '/')
      throw std::invalid_argument("bad rational literal: " + s);
  }
  try {
    Rational r(s);
    return r;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad rational literal: " + s);
  }
}

static const Rational kZeroRat(0);

Poly::Poly(const Rational& constant) {
  if (constant != 0) c_.push_back(constant);
}

Poly::Poly(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { normalize(); }

Poly Poly::dt(int power, const Rational& c) {
  if (power < 0) throw std::invalid_argument("negative power");
  std::vector<Rational> v(power + 1, Rational(0));
  v[power] = c;
  return Poly(std::move(v));
}

void Poly::normalize() {
  while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

const Rational& Poly::coeff(int i) const {
  if (i < 0 || i >= static_cast<int>(c_.size())) return kZeroRat;
  return c_[i];
}

const Rational& Poly::leading() const {
  if (c_.empty()) throw std::logic_error("leading coefficient of zero polynomial");
  return c_.back();
}

Poly Poly::monic() const {
  if (is_zero()) throw std::logic_error("monic of zero polynomial");
  return (Rational(1) / leading()) * (*this);
}

Poly Poly::operator-() const { return Rational(-1) * (*this); }

Poly operator+(const Poly& a, const Poly& b) {
  std::vector<Rational> v(std::max(a.c_.size(), b.c_.size()), Rational(0));
  for (size_t i = 0; i < a.c_.size(); ++i) v[i] += a.c_[i];
  for (size_t i = 0; i < b.c_.size(); ++i) v[i] += b.c_[i];
  return Poly(std::move(v));
}

Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }

Poly operator*(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return Poly();
  std::vector<Rational> v(a.c_.size() + b.c_.size() - 1, Rational(0));
  for (size_t i = 0; i < a.c_.size(); ++i)
    for (size_t j = 0; j < b.c_.size(); ++j) v[i + j] += a.c_[i] * b.c_[j];
  return Poly(std::move(v));
}

Poly operator*(const Rational& s, const Poly& p) {
  std::vector<Rational> v(p.c_);
  for (auto& c : v) c *= s;
  return Poly(std::move(v));
}

std::complex<double> Poly::eval(const std::complex<double>& x) const {
  std::complex<double> acc(0.0, 0.0);
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + to_double(*it);
  return acc;
}

std::vector<double> Poly::coeffs_double() const {
  std::vector<double> v(c_.size());
  for (size_t i = 0; i < c_.size(); ++i) v[i] = to_double(c_[i]);
  return v;
}

std::pair<Poly, Poly> poly_divmod(const Poly& a, const Poly& b) {
  if (b.is_zero()) throw std::invalid_argument("division by zero polynomial");
  Poly r = a;
  std::vector<Rational> q(a.degree() >= b.degree() ? a.degree() - b.degree() + 1 : 0,
                          Rational(0));
  while (!r.is_zero() && r.degree() >= b.degree()) {
    const int shift = r.degree() - b.degree();
    const Rational f = r.leading() / b.leading();
    q[shift] = f;
    r = r - Poly::dt(shift, f) * b;
  }
  return {Poly(std::move(q)), r};
}

Poly poly_gcd(const Poly& a, const Poly& b) {
  if (a.is_zero() && b.is_zero()) throw std::invalid_argument("gcd(0, 0) undefined");
  Poly x = a, y = b;
  while (!y.is_zero()) {
    Poly r = poly_divmod(x, y).second;
    x = y;
    y = r;
  }
  return x.monic();
}

std::string Poly::str() const {
  if (is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (int d = degree(); d >= 0; --d) {
    const Rational& c = c_[d];
    if (c == 0) continue;
    const bool neg = c < 0;
    Rational mag = neg ? Rational(-c) : c;
    if (first) {
      if (neg) os << "-";
      first = false;
    } else {
      os << (neg ? " - " : " + ");
    }
    const bool unit = (mag == 1);
    if (d == 0) {
      os << rational_str(mag);
    } else {
      if (!unit) os << rational_str(mag) << "*";
      os << "Dt";
      if (d > 1) os << "^" << d;
    }
  }
  return os.str();
}

namespace {

struct PolyLexer {
  const std::string& s;
  size_t pos = 0;

  explicit PolyLexer(const std::string& text) : s(text) {}

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool done() {
    skip_ws();
    return pos >= s.size();
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }
  [[noreturn]] void fail(const std::string& what) {
    throw std::invalid_argument("polynomial parse error at column " +
                                std::to_string(pos + 1) + ": " + what);
  }
  // unsigned integer literal
  Rational integer() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) fail("expected digit");
    return Rational(s.substr(start, pos - start));
  }
  // unsigned rational: int or int/int
  Rational rational() {
    Rational num = integer();
    if (peek() == '/') {
      ++pos;
      Rational den = integer();
      if (den == 0) fail("zero denominator");
      return num / den;
    }
    return num;
  }
  bool match_dt() {
    skip_ws();
    if (pos + 1 < s.size() && s[pos] == 'D' && s[pos + 1] == 't') {
      pos += 2;
      return true;
    }
    return false;
  }
};

}  // namespace

Poly Poly::parse(const std::string& text) {
  PolyLexer lx(text);
  Poly acc;
  bool any = false;
  while (!lx.done()) {
    Rational sign(1);
    char c = lx.peek();
    if (c == '+' || c == '-') {
      if (c == '-') sign = -1;
      ++lx.pos;
    } else if (any) {
      lx.fail("expected '+' or '-' between terms");
    }
    // term: [rational ['*']] ['Dt' ['^' int]]
    Rational coeff(1);
    bool have_coeff = false;
    if (std::isdigit(static_cast<unsigned char>(lx.peek()))) {
      coeff = lx.rational();
      have_coeff = true;
      if (lx.peek() == '*') ++lx.pos;
    }
    int power = 0;
    if (lx.match_dt()) {
      power = 1;
      if (lx.peek() == '^') {
        ++lx.pos;
        Rational p = lx.integer();
        if (denominator(p) != 1 || p < 0 || p > 64) lx.fail("bad exponent");
        power = p.convert_to<int>();
      }
    } else if (!have_coeff) {
      lx.fail("expected coefficient or 'Dt'");
    }
    acc = acc + Poly::dt(power, sign * coeff);
    any = true;
  }
  if (!any) throw std::invalid_argument("polynomial parse error: empty input");
  return acc;
}

}  // namespace lodegp
