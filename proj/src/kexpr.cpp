#include "lodegp/kexpr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace lodegp {

double Term::eval(double t1, double t2) const {
  double v = c;
  for (int i = 0; i < p; ++i) v *= t1;
  for (int i = 0; i < q; ++i) v *= t2;
  if (alpha != 0.0 || beta != 0.0) v *= std::exp(alpha * t1 + beta * t2);
  if (trig == Trig::cos) v *= std::cos(b * (t1 - t2));
  if (trig == Trig::sin) v *= std::sin(b * (t1 - t2));
  if (gauss) {
    const double d = t1 - t2;
    v *= std::exp(-d * d / (2.0 * ell2));
  }
  return v;
}

bool Term::same_shape(const Term& o) const {
  return p == o.p && q == o.q && alpha == o.alpha && beta == o.beta &&
         trig == o.trig && b == o.b && gauss == o.gauss && ell2 == o.ell2;
}

static std::tuple<int, int, double, double, int, double, int, double> shape_key(const Term& t) {
  return {t.p, t.q, t.alpha, t.beta, static_cast<int>(t.trig), t.b,
          t.gauss ? 1 : 0, t.ell2};
}

KernelExpr::KernelExpr(std::vector<Term> terms) : t_(std::move(terms)) { normalize(); }

KernelExpr KernelExpr::constant(double c) {
  Term t;
  t.c = c;
  return KernelExpr({t});
}

KernelExpr KernelExpr::se(double ell2, double sigma2) {
  if (!(ell2 > 0.0) || !(sigma2 > 0.0))
    throw std::invalid_argument("squared-exponential kernel needs positive parameters");
  Term t;
  t.c = sigma2;
  t.gauss = true;
  t.ell2 = ell2;
  return KernelExpr({t});
}

void KernelExpr::normalize() {
  std::sort(t_.begin(), t_.end(),
            [](const Term& a, const Term& b) { return shape_key(a) < shape_key(b); });
  std::vector<Term> out;
  for (const Term& t : t_) {
    if (!out.empty() && out.back().same_shape(t))
      out.back().c += t.c;
    else
      out.push_back(t);
  }
  std::erase_if(out, [](const Term& t) { return std::fabs(t.c) < 1e-300; });
  t_ = std::move(out);
}

double KernelExpr::eval(double t1, double t2) const {
  double v = 0.0;
  for (const Term& t : t_) v += t.eval(t1, t2);
  return v;
}

KernelExpr operator+(const KernelExpr& a, const KernelExpr& b) {
  std::vector<Term> v = a.t_;
  v.insert(v.end(), b.t_.begin(), b.t_.end());
  return KernelExpr(std::move(v));
}

KernelExpr operator*(double s, const KernelExpr& k) {
  std::vector<Term> v = k.t_;
  for (Term& t : v) t.c *= s;
  return KernelExpr(std::move(v));
}

namespace {

// Product-rule expansion of d/d(arg) applied to one term.
void diff_term(const Term& t, int arg, std::vector<Term>* out) {
  const bool first = (arg == 1);
  if (first ? t.p > 0 : t.q > 0) {
    Term d = t;
    if (first) {
      d.c *= t.p;
      d.p -= 1;
    } else {
      d.c *= t.q;
      d.q -= 1;
    }
    out->push_back(d);
  }
  const double rate = first ? t.alpha : t.beta;
  if (rate != 0.0) {
    Term d = t;
    d.c *= rate;
    out->push_back(d);
  }
  if (t.trig == Trig::cos) {
    Term d = t;
    d.trig = Trig::sin;
    d.c *= first ? -t.b : t.b;
    out->push_back(d);
  } else if (t.trig == Trig::sin) {
    Term d = t;
    d.trig = Trig::cos;
    d.c *= first ? t.b : -t.b;
    out->push_back(d);
  }
  if (t.gauss) {
    // d/dt1 of the Gaussian factor contributes -(t1 - t2)/ell2 (sign flipped
    // for t2), expanded into the two monomial terms.
    Term d1 = t;
    d1.c *= (first ? -1.0 : 1.0) / t.ell2;
    d1.p += 1;
    out->push_back(d1);
    Term d2 = t;
    d2.c *= (first ? 1.0 : -1.0) / t.ell2;
    d2.q += 1;
    out->push_back(d2);
  }
}

}  // namespace

KernelExpr kexpr_diff(const KernelExpr& k, int arg, int order) {
  if (arg != 1 && arg != 2) throw std::invalid_argument("kexpr_diff: arg must be 1 or 2");
  if (order < 0) throw std::invalid_argument("kexpr_diff: negative order");
  KernelExpr cur = k;
  for (int n = 0; n < order; ++n) {
    std::vector<Term> out;
    for (const Term& t : cur.terms()) diff_term(t, arg, &out);
    cur = KernelExpr(std::move(out));
  }
  return cur;
}

KernelExpr apply_operator_poly(const Poly& p, const KernelExpr& k, int arg) {
  KernelExpr acc;
  KernelExpr deriv = k;
  for (int i = 0; i <= p.degree(); ++i) {
    const double ci = to_double(p.coeff(i));
    if (ci != 0.0) acc = acc + ci * deriv;
    if (i < p.degree()) deriv = kexpr_diff(deriv, arg, 1);
  }
  return acc;
}

nlohmann::json KernelExpr::to_json() const {
  nlohmann::json terms = nlohmann::json::array();
  for (const Term& t : t_) {
    nlohmann::json jt{{"c", t.c}, {"p", t.p}, {"q", t.q}};
    if (t.alpha != 0.0 || t.beta != 0.0) {
      jt["alpha"] = t.alpha;
      jt["beta"] = t.beta;
    }
    if (t.trig != Trig::none) {
      jt["trig"] = t.trig == Trig::cos ? "cos" : "sin";
      jt["b"] = t.b;
    }
    if (t.gauss) jt["ell2"] = t.ell2;
    terms.push_back(std::move(jt));
  }
  return {{"terms", std::move(terms)}};
}

}  // namespace lodegp
