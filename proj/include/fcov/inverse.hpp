#pragma once

#include <string>

#include "fcov/digit.hpp"
#include "fcov/kernel.hpp"

namespace fcov {

enum class InverseMode { Truncated, Smw };

std::string to_string(InverseMode mode);
InverseMode parse_inverse_mode(const std::string& tag);

struct InverseSpec {
  InverseMode mode{InverseMode::Truncated};
  double energy{0.95};  // cumulative eigenvalue fraction to retain, in (0, 1]
  double ridge{0.0};    // stabilization for SMW inner inversions
  int d_n{0};           // retained rank, filled by the inversion
};

// Spectral pseudo-inverse truncated at the smallest leading eigenvalue set
// whose cumulative fraction reaches spec.energy. Fills spec.d_n.
KernelMatrix truncated_inverse(const KernelMatrix& m, InverseSpec& spec);

// Truncated spectral power M^e (e.g. -0.5 for the inverse square root).
KernelMatrix truncated_power(const KernelMatrix& m, double exponent,
                             double energy, int* retained = nullptr);

// Sherman-Morrison-Woodbury inverse of B Sigma_f B^T + Sigma_eps in
// coefficient space, with (Sigma_eps + ridge I) handled directly and the
// inner r*K system solved densely. r = 0 degenerates to the direct inverse.
KernelMatrix smw_inverse(const DigitFit& fit, const KernelMatrix& sigma_eps_aft,
                         double ridge);

struct CorrelationPair {
  KernelMatrix c_hat;      // Tikhonov-regularized correlation matrix function
  KernelMatrix theta_hat;  // regularized inverse correlation
};

// C = (D + kI)^-1/2 Sigma (D + kI)^-1/2 blockwise, D the diagonal blocks;
// Theta = D^1/2 (Sigma + kI)^-1 D^1/2.
CorrelationPair correlation_pair(const KernelMatrix& sigma_y, double kappa);

// 1e-6 * trace / (p*K): the default ridge and kappa scaling.
double default_ridge(const KernelMatrix& m);

}  // namespace fcov
