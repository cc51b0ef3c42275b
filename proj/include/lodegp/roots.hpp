#pragma once

#include <complex>
#include <vector>

#include "lodegp/poly.hpp"

namespace lodegp {

struct RootCluster {
  std::complex<double> root;
  int multiplicity;
};

// Companion-matrix eigenvalues with one guarded Newton polish per root;
// multiple roots recovered by clustering within tol*(1+|root|).
// Multiplicities sum to deg(p). Throws on constant input or when a root
// fails the residual bound.
std::vector<RootCluster> find_roots(const Poly& p, double tol = 1e-6);

// One real factor (b = 0) or complex-conjugate pair (b > 0) of multiplicity j.
struct RootFactor {
  double a = 0.0;
  double b = 0.0;
  int j = 1;
};

// Matches complex roots into conjugate pairs; b stored positive. Throws when a
// complex root has no conjugate partner within tol.
std::vector<RootFactor> pair_conjugates(const std::vector<RootCluster>& roots, double tol = 1e-6);

}  // namespace lodegp
