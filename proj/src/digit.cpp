#include "fcov/digit.hpp"

#include <stdexcept>

#include "fcov/covariance.hpp"
#include "fcov/errors.hpp"

namespace fcov {

namespace {

// kron(B, I_K): maps r*K factor coefficients to p*K curve coefficients.
Eigen::MatrixXd lift(const Eigen::MatrixXd& b, int K) {
  const int p = static_cast<int>(b.rows());
  const int r = static_cast<int>(b.cols());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p * K, r * K);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < r; ++j)
      out.block(i * K, j * K, K, K) =
          b(i, j) * Eigen::MatrixXd::Identity(K, K);
  return out;
}

}  // namespace

Eigen::MatrixXd gram_omega(const KernelMatrix& s) {
  if (!s.square()) throw std::invalid_argument("gram_omega: kernel matrix must be square");
  const int p = s.p_rows, K = s.K;
  // Omega = R R^T where row i of R flattens the i-th block row of s.
  Eigen::MatrixXd r(p, K * p * K);
  for (int i = 0; i < p; ++i) {
    Eigen::MatrixXd rows = s.flat.middleRows(i * K, K);
    r.row(i) = Eigen::Map<const Eigen::VectorXd>(rows.data(), rows.size());
  }
  Eigen::MatrixXd omega = r * r.transpose();
  return 0.5 * (omega + omega.transpose());
}

Eigen::MatrixXd estimate_loadings(const Eigen::MatrixXd& omega, int r) {
  const int p = static_cast<int>(omega.rows());
  if (omega.cols() != p) throw std::invalid_argument("estimate_loadings: omega not square");
  if (r < 1 || r > p) throw std::invalid_argument("estimate_loadings: r out of range");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(omega);
  if (es.info() != Eigen::Success)
    throw NumericalError("estimate_loadings: eigendecomposition failed");
  Eigen::MatrixXd vecs(p, r);
  for (int j = 0; j < r; ++j) vecs.col(j) = es.eigenvectors().col(p - 1 - j);
  fix_signs(vecs);
  return std::sqrt(static_cast<double>(p)) * vecs;
}

FunctionalPanel estimate_factors(const FunctionalPanel& panel,
                                 const Eigen::MatrixXd& loadings) {
  const int p = panel.p, K = panel.K;
  if (loadings.rows() != p)
    throw std::invalid_argument("estimate_factors: loading rows != panel p");
  const int r = static_cast<int>(loadings.cols());
  FunctionalPanel factors(panel.n, r, K);
  const Eigen::MatrixXd proj = lift(loadings, K) / static_cast<double>(p);
  factors.coeffs = panel.coeffs * proj;
  return factors;
}

DigitFit fit_digit(const FunctionalPanel& centered, int r) {
  if (r < 1) throw std::invalid_argument("fit_digit: r must be >= 1");
  DigitFit fit;
  fit.r = r;

  const KernelMatrix cov = sample_cov(centered);
  const Eigen::MatrixXd omega = gram_omega(cov);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(omega);
  if (es.info() != Eigen::Success)
    throw NumericalError("fit_digit: omega eigendecomposition failed");
  fit.omega_eigenvalues = es.eigenvalues().reverse();

  const int p = centered.p, K = centered.K;
  Eigen::MatrixXd vecs(p, r);
  for (int j = 0; j < r; ++j) vecs.col(j) = es.eigenvectors().col(p - 1 - j);
  fix_signs(vecs);
  fit.loadings = std::sqrt(static_cast<double>(p)) * vecs;

  fit.factors = estimate_factors(centered, fit.loadings);
  fit.residuals = FunctionalPanel(centered.n, p, K);
  fit.residuals.coeffs =
      centered.coeffs - fit.factors.coeffs * lift(fit.loadings, K).transpose();
  fit.sigma_f = sample_cov(fit.factors);
  return fit;
}

KernelMatrix common_covariance(const DigitFit& fit) {
  const int K = fit.sigma_f.K;
  const int p = static_cast<int>(fit.loadings.rows());
  const Eigen::MatrixXd g = lift(fit.loadings, K);
  KernelMatrix out(p, p, K);
  out.flat = g * fit.sigma_f.flat * g.transpose();
  out.flat = 0.5 * (out.flat + out.flat.transpose()).eval();
  return out;
}

DigitResult digit_estimator(const FunctionalPanel& centered, int r,
                            const ThresholdRule& rule, bool threshold_diagonal) {
  DigitResult out;
  out.fit = fit_digit(centered, r);
  const KernelMatrix sigma_eps = sample_cov(out.fit.residuals);
  const VarianceFactors vf = variance_factors(out.fit.residuals, sigma_eps);
  const KernelMatrix sigma_eps_aft =
      apply_aft(sigma_eps, vf, rule, centered.n, centered.p, threshold_diagonal);
  out.sigma_y = common_covariance(out.fit) + sigma_eps_aft;
  return out;
}

}  // namespace fcov
