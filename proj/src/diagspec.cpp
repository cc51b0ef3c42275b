#include "lodegp/diagspec.hpp"

#include <cmath>
#include <stdexcept>

namespace lodegp {

int DiagonalSpec::num_free() const {
  int n = 0;
  for (const auto& ch : channels) n += ch.kind == ChannelKind::free ? 1 : 0;
  return n;
}

int DiagonalSpec::num_finite() const {
  int n = 0;
  for (const auto& ch : channels) n += ch.kind == ChannelKind::finite ? 1 : 0;
  return n;
}

namespace {

std::vector<double> dpoly_mul(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// Expand the factor list back into monic coefficients.
std::vector<double> expand_factors(const std::vector<RootFactor>& factors) {
  std::vector<double> acc{1.0};
  for (const auto& f : factors) {
    std::vector<double> base;
    if (f.b == 0.0)
      base = {-f.a, 1.0};
    else
      base = {f.a * f.a + f.b * f.b, -2.0 * f.a, 1.0};
    for (int rep = 0; rep < f.j; ++rep) acc = dpoly_mul(acc, base);
  }
  return acc;
}

}  // namespace

DiagonalSpec analyze_diagonal(const PolyMatrix& d, double tol) {
  DiagonalSpec spec;
  for (int ch = 0; ch < d.cols(); ++ch) {
    Channel channel;
    Poly entry = ch < d.rows() ? d.at(ch, ch) : Poly();
    channel.d = entry;
    if (entry.is_zero()) {
      channel.kind = ChannelKind::free;
    } else if (entry.is_constant()) {
      channel.kind = ChannelKind::unit;
    } else {
      channel.kind = ChannelKind::finite;
      channel.factors = pair_conjugates(find_roots(entry, tol), tol);
      const std::vector<double> expanded = expand_factors(channel.factors);
      const std::vector<double> want = entry.monic().coeffs_double();
      if (expanded.size() != want.size())
        throw std::runtime_error("factor expansion degree mismatch");
      for (size_t i = 0; i < want.size(); ++i)
        if (std::fabs(expanded[i] - want[i]) > 1e-8)
          throw std::runtime_error("factor expansion deviates from diagonal entry");
      for (const auto& f : channel.factors) spec.q += f.b == 0.0 ? f.j : 2 * f.j;
    }
    spec.channels.push_back(std::move(channel));
  }
  return spec;
}

nlohmann::json diagspec_to_json(const DiagonalSpec& spec) {
  nlohmann::json channels = nlohmann::json::array();
  for (const auto& ch : spec.channels) {
    nlohmann::json jc;
    switch (ch.kind) {
      case ChannelKind::unit:
        jc["kind"] = "unit";
        break;
      case ChannelKind::free:
        jc["kind"] = "free";
        break;
      case ChannelKind::finite:
        jc["kind"] = "finite";
        break;
    }
    jc["entry"] = ch.d.str();
    if (ch.kind == ChannelKind::finite) {
      nlohmann::json factors = nlohmann::json::array();
      for (const auto& f : ch.factors)
        factors.push_back({{"a", f.a}, {"b", f.b}, {"multiplicity", f.j}});
      jc["factors"] = std::move(factors);
    }
    channels.push_back(std::move(jc));
  }
  return {{"channels", std::move(channels)}, {"q", spec.q}};
}

KernelExpr base_kernel(const Channel& channel, const ChannelHyperparams& hp) {
  switch (channel.kind) {
    case ChannelKind::unit:
      return KernelExpr();
    case ChannelKind::free:
      return KernelExpr::se(hp.lengthscale_sq, hp.signal_var);
    case ChannelKind::finite:
      break;
  }
  if (hp.uncontrollable_var < 0.0)
    throw std::invalid_argument("uncontrollable variance must be nonnegative");
  KernelExpr acc;
  for (const auto& f : channel.factors) {
    std::vector<Term> terms;
    for (int i = 0; i < f.j; ++i) {
      Term t;
      t.p = i;
      t.q = i;
      t.alpha = f.a;
      t.beta = f.a;
      if (f.b != 0.0) {
        t.trig = Trig::cos;
        t.b = f.b;
      }
      terms.push_back(t);
    }
    acc = acc + KernelExpr(std::move(terms));
  }
  return hp.uncontrollable_var * acc;
}

}  // namespace lodegp
