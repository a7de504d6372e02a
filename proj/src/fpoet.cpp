#include "fcov/fpoet.hpp"

#include <stdexcept>

#include "fcov/covariance.hpp"
#include "fcov/errors.hpp"

namespace fcov {

namespace {

// Residual covariance from a fit's residual panel, plus its variance factors.
struct ResidualPieces {
  KernelMatrix cov;
  VarianceFactors vf;
};

ResidualPieces residual_pieces(const FunctionalPanel& residuals) {
  ResidualPieces out;
  out.cov = sample_cov(residuals);
  out.vf = variance_factors(residuals, out.cov);
  return out;
}

}  // namespace

FpoetFit ls_fit(const FunctionalPanel& centered, int r) {
  const int n = centered.n, p = centered.p, K = centered.K;
  if (r < 0 || r > std::min(n, p * K))
    throw std::invalid_argument("ls_fit: r out of range");

  FpoetFit fit;
  fit.r = r;
  const int spectrum = std::min(n, p * K);
  fit.tau.resize(spectrum);
  fit.eigenfunctions.resize(p * K, r);

  if (p * K <= n) {
    // Primal route: eigendecompose the p*K x p*K sample covariance. Same
    // nonzero spectrum as the dual matrix of curve inner products.
    Eigen::MatrixXd cov =
        centered.coeffs.transpose() * centered.coeffs / static_cast<double>(n);
    cov = 0.5 * (cov + cov.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success)
      throw NumericalError("ls_fit: eigendecomposition failed");
    const int dim = p * K;
    for (int j = 0; j < spectrum; ++j)
      fit.tau[j] = std::max(es.eigenvalues()[dim - 1 - j], 0.0);
    for (int j = 0; j < r; ++j)
      fit.eigenfunctions.col(j) = es.eigenvectors().col(dim - 1 - j);
    fix_signs(fit.eigenfunctions);
    // gamma_j = A phi_j / sqrt(tau_j), so that n^-1 Gamma^T Gamma = I_r.
    fit.gamma.resize(n, r);
    for (int j = 0; j < r; ++j) {
      const double s = std::sqrt(fit.tau[j]);
      if (s > 0)
        fit.gamma.col(j) = centered.coeffs * fit.eigenfunctions.col(j) / s;
      else
        fit.gamma.col(j).setZero();
    }
  } else {
    // Dual route: n x n matrix of curve inner products <y_t, y_t'>.
    const Eigen::MatrixXd dual = centered.coeffs * centered.coeffs.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dual);
    if (es.info() != Eigen::Success)
      throw NumericalError("ls_fit: dual eigendecomposition failed");
    for (int j = 0; j < spectrum; ++j)
      fit.tau[j] = std::max(es.eigenvalues()[n - 1 - j], 0.0) / n;
    Eigen::MatrixXd v(n, r);
    for (int j = 0; j < r; ++j) v.col(j) = es.eigenvectors().col(n - 1 - j);
    fit.gamma = std::sqrt(static_cast<double>(n)) * v;
    // phi_j = A^T v_j / sqrt(n tau_j).
    for (int j = 0; j < r; ++j) {
      const double s = std::sqrt(static_cast<double>(n) * fit.tau[j]);
      if (s > 0)
        fit.eigenfunctions.col(j) = centered.coeffs.transpose() * v.col(j) / s;
      else
        fit.eigenfunctions.col(j).setZero();
    }
    fix_signs(fit.eigenfunctions);
  }
  fit.loadings = centered.coeffs.transpose() * fit.gamma / static_cast<double>(n);

  fit.residuals = FunctionalPanel(n, p, K);
  fit.residuals.coeffs = centered.coeffs - fit.gamma * fit.loadings.transpose();

  fit.complement = KernelMatrix(p, p, K);
  const KernelMatrix cov = sample_cov(centered);
  Eigen::MatrixXd leading = Eigen::MatrixXd::Zero(p * K, p * K);
  for (int j = 0; j < r; ++j)
    leading.noalias() +=
        fit.tau[j] * fit.eigenfunctions.col(j) * fit.eigenfunctions.col(j).transpose();
  fit.complement.flat = cov.flat - leading;
  fit.complement.flat =
      0.5 * (fit.complement.flat + fit.complement.flat.transpose()).eval();
  return fit;
}

FpoetResult fpoet_estimator(const FunctionalPanel& centered, int r,
                            const ThresholdRule& rule, bool threshold_diagonal) {
  const int n = centered.n, p = centered.p, K = centered.K;
  if (r < 1 || r > std::min(n, p * K))
    throw std::invalid_argument("fpoet_estimator: r out of range");
  FpoetResult out;
  out.fit = ls_fit(centered, r);
  const auto pieces = residual_pieces(out.fit.residuals);
  const KernelMatrix thresholded =
      apply_aft(out.fit.complement, pieces.vf, rule, n, p, threshold_diagonal);

  out.sigma_y = KernelMatrix(p, p, K);
  Eigen::MatrixXd leading = Eigen::MatrixXd::Zero(p * K, p * K);
  for (int j = 0; j < r; ++j)
    leading.noalias() += out.fit.tau[j] * out.fit.eigenfunctions.col(j) *
                         out.fit.eigenfunctions.col(j).transpose();
  out.sigma_y.flat = leading + thresholded.flat;
  return out;
}

EquivalenceReport check_equivalence(const FunctionalPanel& centered, int r,
                                    const ThresholdRule& rule) {
  const int n = centered.n, p = centered.p, K = centered.K;

  // Least squares path: dual eigendecomposition.
  const FpoetFit dual_fit = ls_fit(centered, r);
  const auto dual_pieces = residual_pieces(dual_fit.residuals);
  const KernelMatrix sigma_eps_aft =
      apply_aft(dual_pieces.cov, dual_pieces.vf, rule, n, p);
  KernelMatrix sigma_ls(p, p, K);
  sigma_ls.flat =
      dual_fit.loadings * dual_fit.loadings.transpose() + sigma_eps_aft.flat;

  // Spectral path: primal eigendecomposition of the sample covariance.
  const KernelMatrix cov = sample_cov(centered);
  const MercerEigen eig = mercer_eigen(cov, r);
  Eigen::MatrixXd leading = Eigen::MatrixXd::Zero(p * K, p * K);
  for (int j = 0; j < r; ++j)
    leading.noalias() +=
        eig.values[j] * eig.functions.col(j) * eig.functions.col(j).transpose();
  KernelMatrix complement(p, p, K);
  complement.flat = cov.flat - leading;
  // Residual curves of the spectral path: remove the leading eigenprojection.
  FunctionalPanel primal_resid(n, p, K);
  primal_resid.coeffs =
      centered.coeffs -
      (centered.coeffs * eig.functions) * eig.functions.transpose();
  const VarianceFactors primal_vf = variance_factors(primal_resid, complement);
  const KernelMatrix complement_aft = apply_aft(complement, primal_vf, rule, n, p);
  KernelMatrix sigma_spectral(p, p, K);
  sigma_spectral.flat = leading + complement_aft.flat;

  EquivalenceReport out;
  out.sigma_gap = kernel_norm(sigma_spectral - sigma_ls, NormKind::Smax);
  out.complement_gap = kernel_norm(complement_aft - sigma_eps_aft, NormKind::Smax);
  return out;
}

}  // namespace fcov
