#include "lodegp/roots.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lodegp {

namespace {

std::complex<double> eval_dpoly(const std::vector<double>& c, std::complex<double> x) {
  std::complex<double> acc(0.0, 0.0);
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

}  // namespace

std::vector<RootCluster> find_roots(const Poly& p, double tol) {
  if (p.is_zero() || p.degree() < 1)
    throw std::invalid_argument("find_roots needs degree >= 1");
  const Poly pm = p.monic();
  const int n = pm.degree();
  const std::vector<double> c = pm.coeffs_double();
  std::vector<double> dc(n);  // derivative coefficients
  for (int i = 1; i <= n; ++i) dc[i - 1] = i * c[i];

  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -c[i];
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("root finding: eigenvalue iteration failed");

  std::vector<std::complex<double>> roots(n);
  for (int i = 0; i < n; ++i) {
    std::complex<double> z = es.eigenvalues()(i);
    // Accept the Newton step only if it improves the residual; near multiple
    // roots the derivative vanishes and the raw step can overshoot.
    const std::complex<double> pz = eval_dpoly(c, z);
    const std::complex<double> dz = eval_dpoly(dc, z);
    if (std::abs(dz) > 0.0) {
      const std::complex<double> z2 = z - pz / dz;
      if (std::abs(eval_dpoly(c, z2)) < std::abs(pz)) z = z2;
    }
    roots[i] = z;
  }

  std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });

  std::vector<RootCluster> clusters;
  std::vector<bool> used(n, false);
  for (int i = 0; i < n; ++i) {
    if (used[i]) continue;
    std::complex<double> sum = roots[i];
    int count = 1;
    used[i] = true;
    for (int k = i + 1; k < n; ++k) {
      if (used[k]) continue;
      const std::complex<double> mean = sum / static_cast<double>(count);
      if (std::abs(roots[k] - mean) <= tol * (1.0 + std::abs(mean))) {
        sum += roots[k];
        ++count;
        used[k] = true;
      }
    }
    clusters.push_back({sum / static_cast<double>(count), count});
  }

  double coeff_norm = 0.0;
  for (double ci : c) coeff_norm += std::fabs(ci);
  for (const RootCluster& rc : clusters) {
    if (std::abs(eval_dpoly(c, rc.root)) > std::max(tol, 1e-7) * (1.0 + coeff_norm))
      throw std::runtime_error("root finding failed to converge: residual " +
                               std::to_string(std::abs(eval_dpoly(c, rc.root))) +
                               " at root " + std::to_string(rc.root.real()) + "+" +
                               std::to_string(rc.root.imag()) + "i");
  }
  return clusters;
}

std::vector<RootFactor> pair_conjugates(const std::vector<RootCluster>& roots, double tol) {
  std::vector<RootFactor> out;
  std::vector<bool> used(roots.size(), false);
  for (size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    const auto& r = roots[i];
    if (std::fabs(r.root.imag()) <= tol * (1.0 + std::abs(r.root))) {
      out.push_back({r.root.real(), 0.0, r.multiplicity});
      used[i] = true;
      continue;
    }
    // find the conjugate partner
    int partner = -1;
    double best = std::numeric_limits<double>::max();
    for (size_t k = 0; k < roots.size(); ++k) {
      if (k == i || used[k]) continue;
      const double dist = std::abs(roots[k].root - std::conj(r.root));
      if (dist < best) {
        best = dist;
        partner = static_cast<int>(k);
      }
    }
    if (partner < 0 || best > tol * (1.0 + std::abs(r.root)))
      throw std::runtime_error("complex root without conjugate partner");
    if (roots[partner].multiplicity != r.multiplicity)
      throw std::runtime_error("conjugate pair with mismatched multiplicities");
    used[i] = used[partner] = true;
    const double a = 0.5 * (r.root.real() + roots[partner].root.real());
    const double b = 0.5 * std::fabs(r.root.imag() - roots[partner].root.imag());
    out.push_back({a, b, r.multiplicity});
  }
  std::sort(out.begin(), out.end(), [](const RootFactor& x, const RootFactor& y) {
    if (x.a != y.a) return x.a < y.a;
    if (x.b != y.b) return x.b < y.b;
    return x.j < y.j;
  });
  return out;
}

}  // namespace lodegp
