#include "fcov/aft.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "fcov/covariance.hpp"
#include "fcov/errors.hpp"

namespace fcov {

std::string to_string(ThresholdFamily family) {
  switch (family) {
    case ThresholdFamily::Hard: return "hard";
    case ThresholdFamily::Soft: return "soft";
    case ThresholdFamily::Scad: return "scad";
    case ThresholdFamily::AdaptiveLasso: return "alasso";
  }
  return "?";
}

ThresholdFamily parse_threshold_family(const std::string& tag) {
  if (tag == "hard") return ThresholdFamily::Hard;
  if (tag == "soft") return ThresholdFamily::Soft;
  if (tag == "scad") return ThresholdFamily::Scad;
  if (tag == "alasso" || tag == "adaptive-lasso") return ThresholdFamily::AdaptiveLasso;
  throw std::invalid_argument("unknown threshold family: " + tag);
}

VarianceFactors variance_factors(const FunctionalPanel& residuals,
                                 const KernelMatrix& sigma_eps) {
  const int n = residuals.n, p = residuals.p, K = residuals.K;
  if (sigma_eps.p_rows != p || sigma_eps.p_cols != p || sigma_eps.K != K)
    throw std::invalid_argument("variance_factors: covariance shape mismatch");

  // Squared curve norms per (t, i).
  Eigen::MatrixXd sq(n, p);
  for (int i = 0; i < p; ++i)
    sq.col(i) = residuals.coeffs.middleCols(i * K, K).rowwise().squaredNorm();

  Eigen::MatrixXd theta = sq.transpose() * sq / static_cast<double>(n);
  const Eigen::MatrixXd hs = sigma_eps.block_hs_norms();
  theta -= hs.cwiseProduct(hs);

  const double floor = theta.minCoeff();
  if (floor < -1e-10 * std::max(1.0, theta.cwiseAbs().maxCoeff()))
    throw NumericalError("variance_factors: negative integrated variance factor " +
                         std::to_string(floor));
  theta = theta.cwiseMax(0.0);
  theta = 0.5 * (theta + theta.transpose()).eval();
  return VarianceFactors{std::move(theta)};
}

double threshold_level(const ThresholdRule& rule, int n, int p) {
  if (rule.c_dot < 0.0)
    throw std::invalid_argument("threshold_level: c_dot must be >= 0");
  return rule.c_dot * (std::sqrt(std::log(static_cast<double>(p)) / n) +
                       1.0 / std::sqrt(static_cast<double>(p)));
}

double shrink_magnitude(ThresholdFamily family, double z, double lambda,
                        double scad_a, double alasso_eta) {
  if (z <= lambda) return 0.0;
  switch (family) {
    case ThresholdFamily::Hard:
      return z;
    case ThresholdFamily::Soft:
      return z - lambda;
    case ThresholdFamily::Scad: {
      const double a = scad_a;
      if (z <= 2.0 * lambda) return z - lambda;
      if (z <= a * lambda) return ((a - 1.0) * z - a * lambda) / (a - 2.0);
      return z;
    }
    case ThresholdFamily::AdaptiveLasso: {
      const double shrink = std::pow(lambda / z, alasso_eta);
      return z * std::max(0.0, 1.0 - shrink);
    }
  }
  return 0.0;
}

KernelMatrix apply_aft(const KernelMatrix& sigma_eps, const VarianceFactors& vf,
                       const ThresholdRule& rule, int n, int p,
                       bool threshold_diagonal) {
  if (sigma_eps.p_rows != p || sigma_eps.p_cols != p)
    throw std::invalid_argument("apply_aft: shape mismatch");
  if (vf.theta_iint.rows() != p || vf.theta_iint.cols() != p)
    throw std::invalid_argument("apply_aft: variance factor shape mismatch");
  if (rule.scad_a <= 2.0) throw std::invalid_argument("apply_aft: scad_a must be > 2");

  const double lambda = threshold_level(rule, n, p);
  KernelMatrix out = sigma_eps;
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (i == j && !threshold_diagonal) continue;
      const double scale = std::sqrt(vf.theta_iint(i, j));
      auto blk = out.block(i, j);
      if (scale == 0.0) {
        blk.setZero();
        continue;
      }
      const double hs = blk.norm();
      if (hs == 0.0) continue;
      const double z = hs / scale;
      const double shrunk = shrink_magnitude(rule.family, z, lambda, rule.scad_a,
                                             rule.alasso_eta);
      blk *= (shrunk / z);
    }
  }
  return out;
}

double cv_select_cdot(const FunctionalPanel& residuals, const ThresholdRule& base,
                      int folds, const std::vector<double>& c_grid) {
  if (c_grid.empty()) throw std::invalid_argument("cv_select_cdot: empty grid");
  if (folds < 2) throw std::invalid_argument("cv_select_cdot: need >= 2 folds");
  const int n = residuals.n, p = residuals.p, K = residuals.K;
  if (n < 2 * folds) throw std::invalid_argument("cv_select_cdot: too few observations");

  // Contiguous time blocks as folds (serial dependence).
  std::vector<std::pair<int, int>> spans(folds);
  for (int f = 0; f < folds; ++f) {
    spans[f] = {f * n / folds, (f + 1) * n / folds};
  }

  std::vector<double> score(c_grid.size(), 0.0);
  for (int f = 0; f < folds; ++f) {
    const auto [v0, v1] = spans[f];
    const int n_val = v1 - v0;
    const int n_train = n - n_val;

    FunctionalPanel train(n_train, p, K), val(n_val, p, K);
    int row = 0;
    for (int t = 0; t < n; ++t) {
      if (t >= v0 && t < v1)
        val.coeffs.row(t - v0) = residuals.coeffs.row(t);
      else
        train.coeffs.row(row++) = residuals.coeffs.row(t);
    }
    const KernelMatrix cov_train = sample_cov(train);
    const KernelMatrix cov_val = sample_cov(val);
    const VarianceFactors vf = variance_factors(train, cov_train);

    for (std::size_t c = 0; c < c_grid.size(); ++c) {
      ThresholdRule rule = base;
      rule.c_dot = c_grid[c];
      const KernelMatrix shrunk = apply_aft(cov_train, vf, rule, n_train, p);
      score[c] += kernel_norm(shrunk - cov_val, NormKind::SF);
    }
  }

  std::size_t best = 0;
  for (std::size_t c = 1; c < c_grid.size(); ++c)
    if (score[c] < score[best]) best = c;
  return c_grid[best];
}

}  // namespace fcov
