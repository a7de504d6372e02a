#pragma once

#include <array>
#include <string>

#include "fcov/basis.hpp"

namespace fcov {

enum class FitMethod { Digit, Fpoet };

std::string to_string(FitMethod m);
FitMethod parse_fit_method(const std::string& tag);

// Eigenvalue-ratio estimate of the factor count from the spectrum of the
// doubly integrated Gram covariance. Values below eps0 after the p^2
// normalization are zeroed; 0/0 ratios count as 1; first minimum wins.
int ratio_digit(const Eigen::VectorXd& omega_eigenvalues, int p,
                double c_r = 0.75, double eps0 = 0.01);

// Same rule on the sample covariance spectrum with normalization tau / p
// and search range [1, r0].
int ratio_fpoet(const Eigen::VectorXd& tau_eigenvalues, int p, int r0,
                double eps0 = 0.01);

inline int default_fpoet_range(int n, int p) {
  int r0 = static_cast<int>(0.75 * std::min(n, p));
  return std::max(r0, 1);
}

// Mean squared residuals V(r) of the rank-r fit of the given method;
// V(0) is the total mean squared curve norm.
double mean_squared_residuals(const FunctionalPanel& centered, FitMethod method, int r);

struct SelectionReport {
  int r_hat_digit{0};
  int r_hat_fpoet{0};
  // Row 0: digit model, row 1: fpoet model; columns: penalties g1, g2, g3.
  std::array<std::array<double, 3>, 2> pc{};
  std::array<std::array<double, 3>, 2> ic{};
  std::array<double, 3> delta_pc{};
  std::array<double, 3> delta_ic{};
  std::string chosen_model;  // "ffm1" | "ffm2"
  bool ic_defined{true};     // false when some V(r) == 0
};

std::array<double, 3> penalty_values(int p, int n);

// Information criteria at the given ranks; chosen_model by majority vote of
// the three IC differences (PC differences decide when IC is undefined).
SelectionReport information_criteria(const FunctionalPanel& centered,
                                     int r_digit, int r_fpoet);

struct SelectionOptions {
  double c_r{0.75};
  double eps0{0.01};
  int r0{0};  // 0: use default_fpoet_range(n, p)
};

// Full pipeline: ratio estimates for both models, then the criteria report.
SelectionReport select_model(const FunctionalPanel& centered,
                             const SelectionOptions& options = {});

}  // namespace fcov
