#pragma once

#include "fcov/aft.hpp"
#include "fcov/basis.hpp"
#include "fcov/kernel.hpp"

namespace fcov {

// Fitted factor model with scalar loadings and functional factors.
// loadings has sqrt(p)-normalized columns: p^-1 B^T B = I_r.
struct DigitFit {
  Eigen::MatrixXd loadings;           // p x r
  FunctionalPanel factors;            // n x r
  KernelMatrix sigma_f;               // r x r
  FunctionalPanel residuals;          // n x p
  Eigen::VectorXd omega_eigenvalues;  // p, descending
  int r{0};
};

// Doubly integrated Gram covariance of a square kernel matrix:
// Omega(i, l) = sum_j <S_ij, S_lj>_HS, evaluated blockwise. Always PSD.
Eigen::MatrixXd gram_omega(const KernelMatrix& s);

// sqrt(p) times the top-r eigenvectors of Omega, sign-fixed.
Eigen::MatrixXd estimate_loadings(const Eigen::MatrixXd& omega, int r);

// Least squares factor curves: f_t = p^-1 B^T y_t, per basis coefficient.
FunctionalPanel estimate_factors(const FunctionalPanel& panel,
                                 const Eigen::MatrixXd& loadings);

// Full factor fit (loadings, factors, residuals, factor covariance) on a
// centered panel; no thresholding.
DigitFit fit_digit(const FunctionalPanel& centered, int r);

struct DigitResult {
  KernelMatrix sigma_y;
  DigitFit fit;
};

// DIGIT covariance estimator: B Sigma_f B^T + AFT(Sigma_eps).
DigitResult digit_estimator(const FunctionalPanel& centered, int r,
                            const ThresholdRule& rule,
                            bool threshold_diagonal = false);

// Common-component covariance B Sigma_f B^T as a p x p kernel matrix.
KernelMatrix common_covariance(const DigitFit& fit);

}  // namespace fcov
