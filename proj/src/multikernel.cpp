#include "lodegp/multikernel.hpp"

#include <stdexcept>
#include <thread>

namespace lodegp {

MultiKernel build_multikernel(const PolyMatrix& v, const std::vector<KernelExpr>& latent) {
  if (v.rows() != v.cols()) throw std::invalid_argument("base change matrix must be square");
  const int m0 = v.cols();
  if (static_cast<int>(latent.size()) != m0)
    throw std::invalid_argument("one latent kernel per channel required");
  MultiKernel k;
  k.m0 = m0;
  k.entries.assign(static_cast<size_t>(m0) * m0, KernelExpr());
  for (int l = 0; l < m0; ++l) {
    if (latent[l].is_zero()) continue;
    // Apply the column-l operators once per output index, then combine.
    std::vector<KernelExpr> col_t2(m0);
    for (int j = 0; j < m0; ++j) col_t2[j] = apply_operator_poly(v.at(j, l), latent[l], 2);
    for (int i = 0; i < m0; ++i)
      for (int j = 0; j < m0; ++j)
        k.at(i, j) = k.at(i, j) + apply_operator_poly(v.at(i, l), col_t2[j], 1);
  }
  return k;
}

Eigen::MatrixXd gram(const MultiKernel& k, const std::vector<double>& ts, int threads) {
  if (ts.empty()) throw std::invalid_argument("gram over empty time list");
  const int n = static_cast<int>(ts.size());
  const int m0 = k.m0;
  Eigen::MatrixXd g(n * m0, n * m0);
  auto fill_rows = [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i)
      for (int j = 0; j < n; ++j)
        for (int a = 0; a < m0; ++a)
          for (int b = 0; b < m0; ++b)
            g(i * m0 + a, j * m0 + b) = k.at(a, b).eval(ts[i], ts[j]);
  };
  if (threads <= 1 || n < 2) {
    fill_rows(0, n);
  } else {
    const int nt = std::min(threads, n);
    std::vector<std::thread> pool;
    const int chunk = (n + nt - 1) / nt;
    for (int w = 0; w < nt; ++w) {
      const int lo = w * chunk, hi = std::min(n, lo + chunk);
      if (lo < hi) pool.emplace_back(fill_rows, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return g;
}

Eigen::MatrixXd gram_at(const MultiKernel& k, const std::vector<ObsCoord>& obs) {
  const int n = static_cast<int>(obs.size());
  Eigen::MatrixXd g(n, n);
  for (int r = 0; r < n; ++r)
    for (int s = 0; s < n; ++s)
      g(r, s) = k.at(obs[r].second, obs[s].second).eval(obs[r].first, obs[s].first);
  return g;
}

Eigen::MatrixXd cross_gram(const MultiKernel& k, const std::vector<ObsCoord>& rows,
                           const std::vector<ObsCoord>& cols) {
  Eigen::MatrixXd g(rows.size(), cols.size());
  for (int r = 0; r < static_cast<int>(rows.size()); ++r)
    for (int s = 0; s < static_cast<int>(cols.size()); ++s)
      g(r, s) = k.at(rows[r].second, cols[s].second).eval(rows[r].first, cols[s].first);
  return g;
}

}  // namespace lodegp
