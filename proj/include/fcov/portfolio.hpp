#pragma once

#include <vector>

#include "fcov/aft.hpp"
#include "fcov/basis.hpp"
#include "fcov/inverse.hpp"
#include "fcov/kernel.hpp"
#include "fcov/select.hpp"

namespace fcov {

// Functional allocation w(u), one curve per asset, constrained to
// 1_p^T w(u) = 1 on the grid.
struct PortfolioWeights {
  Eigen::MatrixXd w;  // p x K coefficient array
  double constraint_residual{0.0};          // after renormalization
  double pre_normalization_residual{0.0};   // before renormalization
};

// p^-1/2 * SF norm of Sigma^-1/2 K Sigma^-1/2 with the truncated spectral
// inverse square root.
double weighted_quadratic_norm(const KernelMatrix& k_op, const KernelMatrix& sigma_y,
                               const InverseSpec& spec);

// Minimum-variance functional portfolio: w(u) = int int Sigma^-1(u,v)
// diag{H^-1(v,z)} 1_p dv dz with H = 1^T Sigma^-1 1, computed in
// coefficient space and renormalized pointwise on the grid when the
// truncated inversion leaves a constraint residual above 1e-6. Fills
// spec.d_n with the retained rank.
PortfolioWeights min_variance_weights(const KernelMatrix& sigma_y,
                                      const BasisSpec& basis, InverseSpec& spec);

// <w, Sigma(w)>.
double perceived_risk(const PortfolioWeights& weights, const KernelMatrix& sigma);

// Grid double-average of w(u)^T {m^-1 sum_t y_t(u) y_t(v)^T} w(v) with the
// quadrature weights of the basis grid.
double actual_risk(const PortfolioWeights& weights, const FunctionalPanel& holdout,
                   const BasisSpec& basis);

// Cumulative intraday return curves: 100 (log P(u_k) - log P(u_1)).
GridPanel cidr(const GridPanel& prices);

struct BacktestWindow {
  int start{0};          // first training day
  double perceived{0.0};
  double actual{0.0};
  int r{0};
  int d_n{0};
};

// Rolling minimum-variance backtest over a CIDR panel: fit on train_days,
// evaluate actual risk on the following eval_days.
std::vector<BacktestWindow> backtest_min_variance(
    const FunctionalPanel& panel, const BasisSpec& basis, FitMethod method,
    const ThresholdRule& rule, const InverseSpec& spec, int train_days = 126,
    int eval_days = 21, int r = 0 /* 0: eigenvalue-ratio estimate */);

}  // namespace fcov
