#pragma once

#include "fcov/aft.hpp"
#include "fcov/basis.hpp"
#include "fcov/kernel.hpp"

namespace fcov {

// Fitted factor model with scalar factors and functional loadings, from the
// constrained least squares problem. Normalization: n^-1 Gamma^T Gamma = I_r.
struct FpoetFit {
  Eigen::VectorXd tau;            // sample covariance spectrum, descending
  Eigen::MatrixXd eigenfunctions; // (p*K) x r, orthonormal, sign-fixed
  KernelMatrix complement;        // R = Sigma_y_sample - leading r part
  Eigen::MatrixXd gamma;          // n x r scalar factors
  Eigen::MatrixXd loadings;       // (p*K) x r functional loadings Q
  FunctionalPanel residuals;      // n x p
  int r{0};
};

// Constrained least squares fit: columns of n^-1/2 Gamma are the top-r
// eigenvectors of the n x n matrix of curve inner products <y_t, y_t'>;
// Q = n^-1 Y Gamma; residuals y_t - Q gamma_t.
FpoetFit ls_fit(const FunctionalPanel& centered, int r);

struct FpoetResult {
  KernelMatrix sigma_y;
  FpoetFit fit;
};

// FPOET estimator: sum_{j<=r} tau_j phi_j phi_j^T + AFT(R).
FpoetResult fpoet_estimator(const FunctionalPanel& centered, int r,
                            const ThresholdRule& rule,
                            bool threshold_diagonal = false);

struct EquivalenceReport {
  double sigma_gap{0.0};       // |Sigma_F - Sigma_L| in Smax norm
  double complement_gap{0.0};  // |AFT(R) - AFT(Sigma_eps_ls)| in Smax norm
};

// Runs the spectral path (primal eigendecomposition of the sample
// covariance) and the least squares path (dual eigendecomposition)
// independently with the same thresholding rule and reports the largest
// blockwise discrepancies.
EquivalenceReport check_equivalence(const FunctionalPanel& centered, int r,
                                    const ThresholdRule& rule);

}  // namespace fcov
