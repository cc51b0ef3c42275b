#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "lodegp/kexpr.hpp"
#include "lodegp/polymat.hpp"

namespace lodegp {

// m0 x m0 matrix of covariance expressions for a vector-valued process.
struct MultiKernel {
  int m0 = 0;
  std::vector<KernelExpr> entries;  // row-major

  const KernelExpr& at(int i, int j) const { return entries[static_cast<size_t>(i) * m0 + j]; }
  KernelExpr& at(int i, int j) { return entries[static_cast<size_t>(i) * m0 + j]; }
};

// K_ij = sum_l V_il(d/dt1) V_jl(d/dt2) latent_l; zero latents are skipped.
MultiKernel build_multikernel(const PolyMatrix& v, const std::vector<KernelExpr>& latent);

// Observation coordinate: (time, output channel).
using ObsCoord = std::pair<double, int>;

// Block-structured Gram over n times: block (i,j) holds K_ab(t_i, t_j).
// threads > 1 splits rows of the (symmetrized) assembly.
Eigen::MatrixXd gram(const MultiKernel& k, const std::vector<double>& ts, int threads = 1);

// Gram over explicit scalar coordinates.
Eigen::MatrixXd gram_at(const MultiKernel& k, const std::vector<ObsCoord>& obs);

// Rectangular kernel matrix between two coordinate lists.
Eigen::MatrixXd cross_gram(const MultiKernel& k, const std::vector<ObsCoord>& rows,
                           const std::vector<ObsCoord>& cols);

}  // namespace lodegp
