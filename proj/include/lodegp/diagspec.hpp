#pragma once

#include <json.hpp>
#include <vector>

#include "lodegp/kexpr.hpp"
#include "lodegp/polymat.hpp"
#include "lodegp/roots.hpp"

namespace lodegp {

enum class ChannelKind { unit, free, finite };

struct Channel {
  ChannelKind kind;
  Poly d;                           // the diagonal entry (zero for free)
  std::vector<RootFactor> factors;  // finite channels only
};

// Per-channel classification of a diagonal-shape matrix, one channel per
// column. Columns beyond the diagonal carry no constraint and are free.
struct DiagonalSpec {
  std::vector<Channel> channels;
  int q = 0;  // basis-function count over finite channels

  int num_free() const;
  int num_finite() const;
};

// Factors every non-unit nonzero diagonal entry and checks that the expanded
// factors reconstruct its coefficients to within 1e-8.
DiagonalSpec analyze_diagonal(const PolyMatrix& d, double tol = 1e-6);

nlohmann::json diagspec_to_json(const DiagonalSpec& spec);

struct ChannelHyperparams {
  double lengthscale_sq = 1.0;    // free channels
  double signal_var = 1.0;        // free channels
  double uncontrollable_var = 1.0;  // finite channels, may reach 0
};

// Latent covariance for one channel: unit -> zero expression, free ->
// squared-exponential, finite -> uncontrollable_var times the sum of
// per-factor expressions (sum_i t1^i t2^i) * exp(a(t1+t2)) [* cos(b(t1-t2))].
KernelExpr base_kernel(const Channel& channel, const ChannelHyperparams& hp);

}  // namespace lodegp
