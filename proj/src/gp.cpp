#include "lodegp/gp.hpp"

#include <cmath>

namespace lodegp {

void Dataset::validate(int m0) const {
  for (const auto& p : points) {
    if (!std::isfinite(p.t)) throw validation_error("dataset time not finite");
    if (p.f.size() != m0 || p.noise_var.size() != m0)
      throw validation_error("dataset vectors must have one entry per channel");
    if (!p.mask.empty() && static_cast<int>(p.mask.size()) != m0)
      throw validation_error("dataset mask must have one entry per channel");
    for (int c = 0; c < m0; ++c) {
      const bool seen = p.mask.empty() || p.mask[c];
      if (!seen) continue;
      if (!std::isfinite(p.f(c))) throw validation_error("dataset value not finite");
      if (!(p.noise_var(c) >= 0.0)) throw validation_error("negative noise variance");
    }
  }
}

std::vector<ObsCoord> Dataset::coords() const {
  std::vector<ObsCoord> out;
  for (const auto& p : points)
    for (int c = 0; c < p.f.size(); ++c)
      if (p.mask.empty() || p.mask[c]) out.emplace_back(p.t, c);
  return out;
}

Eigen::VectorXd Dataset::values() const {
  Eigen::VectorXd v(num_scalars());
  int k = 0;
  for (const auto& p : points)
    for (int c = 0; c < p.f.size(); ++c)
      if (p.mask.empty() || p.mask[c]) v(k++) = p.f(c);
  return v;
}

Eigen::VectorXd Dataset::noises() const {
  Eigen::VectorXd v(num_scalars());
  int k = 0;
  for (const auto& p : points)
    for (int c = 0; c < p.f.size(); ++c)
      if (p.mask.empty() || p.mask[c]) v(k++) = p.noise_var(c);
  return v;
}

int Dataset::num_scalars() const {
  int n = 0;
  for (const auto& p : points)
    for (int c = 0; c < p.f.size(); ++c)
      if (p.mask.empty() || p.mask[c]) ++n;
  return n;
}

Theta Theta::zeros(const DiagonalSpec& spec) {
  Theta t;
  t.log_ell2.assign(spec.num_free(), 0.0);
  t.log_sigf2.assign(spec.num_free(), 0.0);
  t.log_sigu2.assign(spec.num_finite(), 0.0);
  return t;
}

std::vector<double> Theta::flatten() const {
  std::vector<double> x;
  for (size_t i = 0; i < log_ell2.size(); ++i) {
    x.push_back(log_ell2[i]);
    x.push_back(log_sigf2[i]);
  }
  x.insert(x.end(), log_sigu2.begin(), log_sigu2.end());
  return x;
}

Theta Theta::unflatten(const DiagonalSpec& spec, const std::vector<double>& x) {
  const int nf = spec.num_free();
  const int nu = spec.num_finite();
  if (static_cast<int>(x.size()) != 2 * nf + nu)
    throw validation_error("hyperparameter vector has wrong length");
  Theta t;
  for (int i = 0; i < nf; ++i) {
    t.log_ell2.push_back(x[2 * i]);
    t.log_sigf2.push_back(x[2 * i + 1]);
  }
  t.log_sigu2.assign(x.begin() + 2 * nf, x.end());
  return t;
}

MultiKernel kernel_for(const LodeGP& gp, const Theta& theta) {
  const DiagonalSpec& spec = gp.spec;
  if (static_cast<int>(theta.log_ell2.size()) != spec.num_free() ||
      static_cast<int>(theta.log_sigf2.size()) != spec.num_free() ||
      static_cast<int>(theta.log_sigu2.size()) != spec.num_finite())
    throw validation_error("hyperparameters do not match channel structure");
  std::vector<KernelExpr> latent;
  int ifree = 0, ifinite = 0;
  for (const Channel& ch : spec.channels) {
    ChannelHyperparams hp;
    switch (ch.kind) {
      case ChannelKind::unit:
        latent.emplace_back();
        continue;
      case ChannelKind::free:
        hp.lengthscale_sq = std::exp(theta.log_ell2[ifree]);
        hp.signal_var = std::exp(theta.log_sigf2[ifree]);
        ++ifree;
        break;
      case ChannelKind::finite:
        hp.uncontrollable_var = std::exp(theta.log_sigu2[ifinite]);
        ++ifinite;
        break;
    }
    latent.push_back(base_kernel(ch, hp));
  }
  return build_multikernel(gp.basis, latent);
}

LodeGP build_lode_gp(const PolyMatrix& a, const Theta& theta, const PolyMatrix* base_change,
                     double root_tol) {
  LodeGP gp;
  gp.a = a;
  gp.dec = snf(a);
  gp.spec = analyze_diagonal(gp.dec.d, root_tol);
  if (base_change) {
    if (base_change->rows() != a.cols() || base_change->cols() != a.cols())
      throw validation_error("base change must be square over the system channels");
    const Poly det = unimodular_det(*base_change);
    if (det.is_zero() || !det.is_constant())
      throw validation_error("base change is not unimodular");
    // A * column l must vanish (free channel) or lie in (d_l) (finite
    // channel) wherever the latent kernel is nonzero.
    const PolyMatrix w = polymat_mul(a, *base_change);
    for (int l = 0; l < static_cast<int>(gp.spec.channels.size()); ++l) {
      const Channel& ch = gp.spec.channels[l];
      if (ch.kind == ChannelKind::unit) continue;
      for (int i = 0; i < w.rows(); ++i) {
        const Poly& e = w.at(i, l);
        const bool ok = ch.kind == ChannelKind::free
                            ? e.is_zero()
                            : (e.is_zero() || poly_divmod(e, ch.d).second.is_zero());
        if (!ok)
          throw validation_error("base change does not preserve the solution set");
      }
    }
    gp.basis = *base_change;
  } else {
    gp.basis = gp.dec.v;
  }
  gp.theta = theta.size() == 0 ? Theta::zeros(gp.spec) : theta;
  gp.kernel = kernel_for(gp, gp.theta);
  return gp;
}

PsdSolve psd_solve(const Eigen::MatrixXd& m, const Eigen::MatrixXd& b,
                   const JitterPolicy& policy) {
  if (m.rows() != m.cols()) throw validation_error("psd_solve needs a square matrix");
  const double scale = m.diagonal().mean();
  for (double mult : policy.ladder) {
    const double lambda = mult * scale;
    Eigen::MatrixXd shifted = m;
    shifted.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() != Eigen::Success) continue;
    const Eigen::VectorXd ld = llt.matrixL().toDenseMatrix().diagonal();
    const double lmin = ld.minCoeff(), lmax = ld.maxCoeff();
    // A factorization with a near-zero pivot technically succeeded but the
    // solve is garbage; escalate instead.
    if (!(lmin > 0.0) || (lmin / lmax) * (lmin / lmax) < 1e-14) continue;
    PsdSolve out;
    out.x = llt.solve(b);
    out.logdet = 2.0 * ld.array().log().sum();
    out.lambda_used = lambda;
    return out;
  }
  throw numerical_error("Gram matrix numerically singular");
}

Posterior posterior(const LodeGP& gp, const Dataset& data, const std::vector<double>& tstar,
                    const JitterPolicy& policy) {
  const int m0 = gp.kernel.m0;
  if (data.points.empty()) throw validation_error("posterior needs a nonempty dataset");
  data.validate(m0);
  const std::vector<ObsCoord> coords = data.coords();
  if (coords.empty()) throw validation_error("dataset has no observed channels");

  Eigen::MatrixXd kmat = gram_at(gp.kernel, coords);
  kmat.diagonal() += data.noises();
  const Eigen::VectorXd f = data.values();

  std::vector<ObsCoord> query;
  query.reserve(tstar.size() * m0);
  for (double t : tstar)
    for (int c = 0; c < m0; ++c) query.emplace_back(t, c);

  const Eigen::MatrixXd kstar = cross_gram(gp.kernel, query, coords);
  const Eigen::MatrixXd kqq = gram_at(gp.kernel, query);
  Eigen::MatrixXd rhs(kmat.rows(), 1 + kstar.rows());
  rhs.col(0) = f;
  rhs.rightCols(kstar.rows()) = kstar.transpose();
  const PsdSolve sol = psd_solve(kmat, rhs, policy);
  const Eigen::VectorXd alpha = sol.x.col(0);

  Posterior post;
  post.tstar = tstar;
  post.lambda_used = sol.lambda_used;
  post.alpha = alpha;
  post.coords = coords;
  post.cov = kqq - kstar * sol.x.rightCols(kstar.rows());
  const Eigen::VectorXd mean_flat = kstar * alpha;
  post.mean.resize(tstar.size(), m0);
  post.std.resize(tstar.size(), m0);
  for (size_t i = 0; i < tstar.size(); ++i)
    for (int c = 0; c < m0; ++c) {
      post.mean(i, c) = mean_flat(i * m0 + c);
      post.std(i, c) = std::sqrt(std::max(0.0, post.cov(i * m0 + c, i * m0 + c)));
    }
  return post;
}

double nll(const LodeGP& gp, const Dataset& data, double* lambda_used,
           const JitterPolicy& policy) {
  if (data.points.empty()) throw validation_error("nll needs a nonempty dataset");
  data.validate(gp.kernel.m0);
  const std::vector<ObsCoord> coords = data.coords();
  Eigen::MatrixXd kmat = gram_at(gp.kernel, coords);
  kmat.diagonal() += data.noises();
  const Eigen::VectorXd f = data.values();
  const PsdSolve sol = psd_solve(kmat, f, policy);
  if (lambda_used) *lambda_used = sol.lambda_used;
  return 0.5 * f.dot(sol.x.col(0)) + 0.5 * sol.logdet;
}

}  // namespace lodegp
