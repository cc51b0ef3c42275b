#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "lodegp/diagspec.hpp"
#include "lodegp/errors.hpp"
#include "lodegp/multikernel.hpp"
#include "lodegp/snf.hpp"

namespace lodegp {

struct DataPoint {
  double t;
  Eigen::VectorXd f;          // length m0
  Eigen::VectorXd noise_var;  // length m0, entries >= 0
  std::vector<bool> mask;     // empty = every channel observed
};

struct Dataset {
  std::vector<DataPoint> points;

  // Throws validation_error on non-finite values, negative noise, or
  // mismatched lengths.
  void validate(int m0) const;
  // Observed scalar coordinates in declaration order.
  std::vector<ObsCoord> coords() const;
  Eigen::VectorXd values() const;
  Eigen::VectorXd noises() const;
  int num_scalars() const;
};

// Log-space hyperparameters. Flattened layout: (log ell2, log sigf2) per free
// channel in channel order, then log sigu2 per finite channel in channel
// order.
struct Theta {
  std::vector<double> log_ell2;
  std::vector<double> log_sigf2;
  std::vector<double> log_sigu2;

  static Theta zeros(const DiagonalSpec& spec);
  std::vector<double> flatten() const;
  static Theta unflatten(const DiagonalSpec& spec, const std::vector<double>& x);
  int size() const { return static_cast<int>(log_ell2.size() + log_sigf2.size() + log_sigu2.size()); }
};

struct LodeGP {
  PolyMatrix a;
  SNFDecomposition dec;
  DiagonalSpec spec;
  PolyMatrix basis;  // base change actually used for the covariance
  MultiKernel kernel;
  Theta theta;
};

// Factors the system, classifies channels, and assembles the covariance.
// base_change, when given, replaces the computed V after certification:
// constant nonzero determinant, and every column feeding a nonzero latent
// must keep A * column inside the ideal of that channel's diagonal entry.
LodeGP build_lode_gp(const PolyMatrix& a, const Theta& theta,
                     const PolyMatrix* base_change = nullptr, double root_tol = 1e-6);

// Covariance for a different theta on the same structure.
MultiKernel kernel_for(const LodeGP& gp, const Theta& theta);

struct JitterPolicy {
  std::vector<double> ladder{0.0, 1e-10, 1e-8, 1e-6};
};

struct PsdSolve {
  Eigen::MatrixXd x;
  double logdet;
  double lambda_used;
};

// Solves (M + lambda I) X = B by Cholesky, escalating lambda through
// ladder * mean(diag(M)) until the factorization is trustworthy. Throws
// numerical_error once the ladder is exhausted.
PsdSolve psd_solve(const Eigen::MatrixXd& m, const Eigen::MatrixXd& b,
                   const JitterPolicy& policy = {});

struct Posterior {
  std::vector<double> tstar;
  Eigen::MatrixXd mean;  // len(tstar) x m0
  Eigen::MatrixXd cov;   // joint, (len(tstar)*m0)^2, time-major blocks
  Eigen::MatrixXd std;   // len(tstar) x m0
  double lambda_used = 0.0;
  Eigen::VectorXd alpha;         // representer weights of the mean
  std::vector<ObsCoord> coords;  // observed scalars the weights refer to
};

// Zero prior mean; observation noise from the dataset plus the jitter ladder.
Posterior posterior(const LodeGP& gp, const Dataset& data, const std::vector<double>& tstar,
                    const JitterPolicy& policy = {});

// 1/2 f^T (K+N)^-1 f + 1/2 logdet(K+N), constant term omitted.
double nll(const LodeGP& gp, const Dataset& data, double* lambda_used = nullptr,
           const JitterPolicy& policy = {});

struct TrainBounds {
  double ell2_lo = -6.0, ell2_hi = 4.0;
  double sigf2_lo = -6.0, sigf2_hi = 4.0;
  double sigu2_lo = -12.0, sigu2_hi = 4.0;
  // (lo, hi) of one flattened coordinate.
  std::pair<double, double> at(const DiagonalSpec& spec, int index) const;
};

struct TrainOptions {
  TrainBounds bounds;
  int restarts = 8;
  std::uint64_t seed = kDefaultSeed;
  std::vector<bool> freeze;  // per flattened coordinate; empty = train all
  int max_iters = 2000;
};

struct TrainResult {
  Theta theta;
  double nll = 0.0;
  long evals = 0;
};

// Derivative-free simplex descent in log space: bound handling by clamping
// inside the objective, quasi-random restarts, then a polish loop from the
// incumbent. Deterministic for a fixed seed.
TrainResult train(const LodeGP& gp, const Dataset& data, const Theta& init,
                  const TrainOptions& opt = {});

struct GridAxis {
  double lo = 0.0, hi = 0.0;
  int count = 1;
  double point(int i) const {
    return count > 1 ? lo + (hi - lo) * i / (count - 1) : lo;
  }
};

struct GridResult {
  std::vector<GridAxis> axes;
  // Row-major over the axes (last axis fastest); NaN marks a failed cell.
  std::vector<double> nll;
};

GridResult nll_grid(const LodeGP& gp, const Dataset& data, const std::vector<GridAxis>& axes,
                    int threads = 1);

}  // namespace lodegp
