#pragma once

#include <string>
#include <vector>

#include "fcov/basis.hpp"
#include "fcov/kernel.hpp"

namespace fcov {

enum class ThresholdFamily { Hard, Soft, Scad, AdaptiveLasso };

std::string to_string(ThresholdFamily family);
ThresholdFamily parse_threshold_family(const std::string& tag);

struct ThresholdRule {
  ThresholdFamily family{ThresholdFamily::Soft};
  double c_dot{0.5};
  double scad_a{3.7};
  double alasso_eta{1.0};
};

// Doubly integrated functional variance factors: theta(i, j) holds
// iint Theta_ij(u, v) du dv where Theta_ij(u,v) = Var{e_ti(u) e_tj(v)}.
// The entry-adaptive threshold scale is its square root.
struct VarianceFactors {
  Eigen::MatrixXd theta_iint;  // p x p, symmetric, nonnegative

  Eigen::MatrixXd scales() const { return theta_iint.cwiseSqrt(); }
};

// Closed coefficient-space form: theta(i,j) = n^-1 sum_t |a_ti|^2 |a_tj|^2
// - |C_ij|_F^2, with C the sample covariance of the residuals. Small
// negatives (round-off) clamp to 0; larger ones raise NumericalError.
VarianceFactors variance_factors(const FunctionalPanel& residuals,
                                 const KernelMatrix& sigma_eps);

// lambda = C_dot * (sqrt(log p / n) + 1 / sqrt(p))
double threshold_level(const ThresholdRule& rule, int n, int p);

// Scalar shrinkage of a nonnegative magnitude z at level lambda.
double shrink_magnitude(ThresholdFamily family, double z, double lambda,
                        double scad_a, double alasso_eta);

// Adaptive functional thresholding: each off-diagonal block is rescaled by
// scale_ij = sqrt(theta_iint(i,j)), shrunk in HS norm with direction kept,
// and rescaled back. Diagonal blocks untouched unless threshold_diagonal.
KernelMatrix apply_aft(const KernelMatrix& sigma_eps, const VarianceFactors& vf,
                       const ThresholdRule& rule, int n, int p,
                       bool threshold_diagonal = false);

// Multifold cross-validation for C_dot over contiguous time-block folds.
// Score: SF loss between AFT of the training-fold covariance and the
// validation-fold sample covariance, averaged over folds. First minimum on
// ties.
double cv_select_cdot(const FunctionalPanel& residuals, const ThresholdRule& base,
                      int folds, const std::vector<double>& c_grid);

}  // namespace fcov
