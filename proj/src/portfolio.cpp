#include "fcov/portfolio.hpp"

#include <cmath>
#include <stdexcept>

#include "fcov/covariance.hpp"
#include "fcov/digit.hpp"
#include "fcov/errors.hpp"
#include "fcov/fpoet.hpp"

namespace fcov {

namespace {

// Pseudo-inverse of a small symmetric PSD matrix on its numerical range.
Eigen::MatrixXd pinv_on_range(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (sym + sym.transpose()));
  const Eigen::VectorXd vals = es.eigenvalues();
  const double cutoff = 1e-12 * std::max(vals.cwiseAbs().maxCoeff(), 1e-300);
  int used = 0;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(sym.rows(), sym.cols());
  for (int j = 0; j < vals.size(); ++j) {
    if (vals[j] > cutoff) {
      out.noalias() +=
          (1.0 / vals[j]) * es.eigenvectors().col(j) * es.eigenvectors().col(j).transpose();
      ++used;
    }
  }
  if (used == 0) throw SingularInput("portfolio: H kernel numerically singular");
  return out;
}

double constraint_residual_on_grid(const Eigen::MatrixXd& w_coeffs,
                                   const BasisSpec& basis) {
  const Eigen::VectorXd total =
      basis.values * w_coeffs.colwise().sum().transpose();
  return (total.array() - 1.0).abs().maxCoeff();
}

}  // namespace

double weighted_quadratic_norm(const KernelMatrix& k_op, const KernelMatrix& sigma_y,
                               const InverseSpec& spec) {
  if (k_op.p_rows != sigma_y.p_rows || k_op.p_cols != sigma_y.p_cols ||
      k_op.K != sigma_y.K)
    throw std::invalid_argument("weighted_quadratic_norm: shape mismatch");
  if (sigma_y.flat.size() == 0 || sigma_y.flat.cwiseAbs().maxCoeff() == 0.0)
    throw SingularInput("weighted_quadratic_norm: zero covariance");
  const KernelMatrix inv_sqrt = truncated_power(sigma_y, -0.5, spec.energy, nullptr);
  const Eigen::MatrixXd weighted = inv_sqrt.flat * k_op.flat * inv_sqrt.flat;
  return weighted.norm() / std::sqrt(static_cast<double>(sigma_y.p_rows));
}

PortfolioWeights min_variance_weights(const KernelMatrix& sigma_y,
                                      const BasisSpec& basis, InverseSpec& spec) {
  require_symmetric(sigma_y, 1e-6, "min_variance_weights");
  const int p = sigma_y.p_rows, K = sigma_y.K;
  if (basis.K != K)
    throw std::invalid_argument("min_variance_weights: basis K mismatch");

  const KernelMatrix inv = truncated_inverse(sigma_y, spec);

  // H(u, v) = 1^T Sigma^-1(u, v) 1: sum of all blocks of the inverse.
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(K, K);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) h += inv.block(i, j);
  h = 0.5 * (h + h.transpose()).eval();

  const Eigen::VectorXd one_coeffs = basis.constant_coeffs();
  const Eigen::VectorXd m = pinv_on_range(h) * one_coeffs;

  PortfolioWeights out;
  out.w.resize(p, K);
  for (int i = 0; i < p; ++i) {
    Eigen::VectorXd wi = Eigen::VectorXd::Zero(K);
    for (int j = 0; j < p; ++j) wi += inv.block(i, j) * m;
    out.w.row(i) = wi.transpose();
  }

  out.pre_normalization_residual = constraint_residual_on_grid(out.w, basis);
  out.constraint_residual = out.pre_normalization_residual;

  // Truncated inversion can leave 1^T w(u) off 1. Spread the pointwise
  // deficit equally across assets; the correction curve lies in the basis
  // span, so the constraint becomes exact in coefficient space.
  if (out.constraint_residual > 1e-6) {
    const Eigen::VectorXd deficit =
        (one_coeffs - out.w.colwise().sum().transpose()) / p;
    out.w.rowwise() += deficit.transpose();
    out.constraint_residual = constraint_residual_on_grid(out.w, basis);
  }
  return out;
}

double perceived_risk(const PortfolioWeights& weights, const KernelMatrix& sigma) {
  const int p = sigma.p_rows, K = sigma.K;
  if (weights.w.rows() != p || weights.w.cols() != K)
    throw std::invalid_argument("perceived_risk: shape mismatch");
  // Flatten w to the kernel layout (series-major).
  Eigen::VectorXd a(p * K);
  for (int i = 0; i < p; ++i) a.segment(i * K, K) = weights.w.row(i).transpose();
  return a.dot(sigma.flat * a);
}

double actual_risk(const PortfolioWeights& weights, const FunctionalPanel& holdout,
                   const BasisSpec& basis) {
  const int p = holdout.p, K = holdout.K;
  if (weights.w.rows() != p || weights.w.cols() != K || basis.K != K)
    throw std::invalid_argument("actual_risk: shape mismatch");
  const int g = basis.grid_size();
  // w on the grid: p x G.
  const Eigen::MatrixXd w_grid = (basis.values * weights.w.transpose()).transpose();

  double acc = 0.0;
  for (int t = 0; t < holdout.n; ++t) {
    double s = 0.0;
    for (int gi = 0; gi < g; ++gi) {
      double dot = 0.0;
      for (int i = 0; i < p; ++i)
        dot += w_grid(i, gi) * basis.values.row(gi).dot(holdout.series_coeffs(t, i));
      s += basis.quad_weights[gi] * dot;
    }
    acc += s * s;
  }
  return acc / holdout.n;
}

GridPanel cidr(const GridPanel& prices) {
  if ((prices.values.array() <= 0.0).any())
    throw std::invalid_argument("cidr: prices must be positive");
  GridPanel out;
  out.n = prices.n;
  out.p = prices.p;
  // One log evaluation reused for the offset column keeps the first grid
  // value exactly zero.
  const Eigen::ArrayXXd logs = prices.values.array().log();
  out.values = 100.0 * (logs.colwise() - logs.col(0));
  return out;
}

std::vector<BacktestWindow> backtest_min_variance(
    const FunctionalPanel& panel, const BasisSpec& basis, FitMethod method,
    const ThresholdRule& rule, const InverseSpec& spec, int train_days,
    int eval_days, int r) {
  if (train_days < 2 || eval_days < 1)
    throw std::invalid_argument("backtest: invalid window sizes");
  std::vector<BacktestWindow> out;
  for (int start = 0; start + train_days + eval_days <= panel.n;
       start += eval_days) {
    FunctionalPanel train(train_days, panel.p, panel.K);
    train.coeffs = panel.coeffs.middleRows(start, train_days);
    FunctionalPanel eval_panel(eval_days, panel.p, panel.K);
    eval_panel.coeffs = panel.coeffs.middleRows(start + train_days, eval_days);

    const FunctionalPanel centered = center(train);
    int use_r = r;
    if (use_r <= 0) {
      const KernelMatrix cov = sample_cov(centered);
      if (method == FitMethod::Digit) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_omega(cov));
        use_r = ratio_digit(es.eigenvalues().reverse(), panel.p);
      } else {
        const FpoetFit probe = ls_fit(centered, 0);
        use_r = ratio_fpoet(probe.tau, panel.p,
                            default_fpoet_range(centered.n, panel.p));
      }
    }

    KernelMatrix sigma;
    if (method == FitMethod::Digit)
      sigma = digit_estimator(centered, use_r, rule).sigma_y;
    else
      sigma = fpoet_estimator(centered, use_r, rule).sigma_y;

    InverseSpec local = spec;
    PortfolioWeights w = min_variance_weights(sigma, basis, local);

    BacktestWindow window;
    window.start = start;
    window.r = use_r;
    window.d_n = local.d_n;
    window.perceived = perceived_risk(w, sigma);
    window.actual = actual_risk(w, eval_panel, basis);
    out.push_back(window);
  }
  return out;
}

}  // namespace fcov
