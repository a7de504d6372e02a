#include "fcov/inverse.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fcov/errors.hpp"

namespace fcov {

namespace {

Eigen::MatrixXd lift(const Eigen::MatrixXd& b, int K) {
  const int p = static_cast<int>(b.rows());
  const int r = static_cast<int>(b.cols());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p * K, r * K);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < r; ++j)
      out.block(i * K, j * K, K, K) = b(i, j) * Eigen::MatrixXd::Identity(K, K);
  return out;
}

// Symmetric matrix power on the leading eigenspace covering `energy` of the
// total (clamped) spectrum mass.
Eigen::MatrixXd spectral_power(const Eigen::MatrixXd& sym, double exponent,
                               double energy, int* retained) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (sym + sym.transpose()));
  if (es.info() != Eigen::Success)
    throw NumericalError("spectral_power: eigendecomposition failed");
  const int dim = static_cast<int>(sym.rows());
  const Eigen::VectorXd vals = es.eigenvalues().reverse().cwiseMax(0.0);
  const double total = vals.sum();
  if (total <= 0.0) throw SingularInput("spectral_power: zero spectrum");

  const double tiny = 1e-14 * vals[0];
  int d_n = 0;
  double cum = 0.0;
  for (int j = 0; j < dim; ++j) {
    if (vals[j] <= tiny) break;
    cum += vals[j];
    d_n = j + 1;
    if (cum >= energy * total - 1e-15 * total) break;
  }
  if (d_n == 0) throw SingularInput("spectral_power: no usable eigenvalues");
  if (retained) *retained = d_n;

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
  for (int j = 0; j < d_n; ++j) {
    const Eigen::VectorXd v = es.eigenvectors().col(dim - 1 - j);
    out.noalias() += std::pow(vals[j], exponent) * v * v.transpose();
  }
  return out;
}

}  // namespace

std::string to_string(InverseMode mode) {
  return mode == InverseMode::Truncated ? "truncated" : "smw";
}

InverseMode parse_inverse_mode(const std::string& tag) {
  if (tag == "truncated") return InverseMode::Truncated;
  if (tag == "smw") return InverseMode::Smw;
  throw std::invalid_argument("unknown inverse mode: " + tag);
}

double default_ridge(const KernelMatrix& m) {
  if (!m.square()) throw std::invalid_argument("default_ridge: matrix must be square");
  const int dim = m.p_rows * m.K;
  return 1e-6 * m.flat.trace() / dim;
}

KernelMatrix truncated_power(const KernelMatrix& m, double exponent, double energy,
                             int* retained) {
  require_symmetric(m, 1e-6, "truncated_power");
  KernelMatrix out(m.p_rows, m.p_cols, m.K);
  out.flat = spectral_power(m.flat, exponent, energy, retained);
  return out;
}

KernelMatrix truncated_inverse(const KernelMatrix& m, InverseSpec& spec) {
  if (spec.energy <= 0.0 || spec.energy > 1.0)
    throw std::invalid_argument("truncated_inverse: energy must be in (0, 1]");
  if (m.flat.size() == 0 || m.flat.cwiseAbs().maxCoeff() == 0.0)
    throw SingularInput("truncated_inverse: zero matrix");
  return truncated_power(m, -1.0, spec.energy, &spec.d_n);
}

KernelMatrix smw_inverse(const DigitFit& fit, const KernelMatrix& sigma_eps_aft,
                         double ridge) {
  require_symmetric(sigma_eps_aft, 1e-6, "smw_inverse");
  const int p = sigma_eps_aft.p_rows, K = sigma_eps_aft.K;
  const int dim = p * K;
  if (ridge < 0) throw std::invalid_argument("smw_inverse: ridge must be >= 0");

  Eigen::MatrixXd e = 0.5 * (sigma_eps_aft.flat + sigma_eps_aft.flat.transpose());
  e.diagonal().array() += ridge;
  Eigen::LDLT<Eigen::MatrixXd> eps_solver(e);
  const double d_max = eps_solver.vectorD().cwiseAbs().maxCoeff();
  if (eps_solver.info() != Eigen::Success || d_max == 0.0 ||
      eps_solver.vectorD().cwiseAbs().minCoeff() < 1e-14 * d_max)
    throw SingularInput("smw_inverse: idiosyncratic covariance not invertible");

  KernelMatrix out(p, p, K);
  const Eigen::MatrixXd e_inv = eps_solver.solve(Eigen::MatrixXd::Identity(dim, dim));
  if (fit.r == 0) {
    out.flat = 0.5 * (e_inv + e_inv.transpose());
    return out;
  }

  if (fit.loadings.rows() != p || fit.sigma_f.K != K)
    throw std::invalid_argument("smw_inverse: fit does not match covariance shape");
  const Eigen::MatrixXd b = lift(fit.loadings, K);  // dim x rK
  const Eigen::MatrixXd sigma_f_pinv =
      spectral_power(fit.sigma_f.flat, -1.0, 1.0, nullptr);

  const Eigen::MatrixXd e_inv_b = eps_solver.solve(b);
  Eigen::MatrixXd inner = sigma_f_pinv + b.transpose() * e_inv_b;
  inner = 0.5 * (inner + inner.transpose()).eval();
  Eigen::LDLT<Eigen::MatrixXd> inner_solver(inner);
  if (inner_solver.info() != Eigen::Success ||
      (inner_solver.vectorD().array().abs() < 1e-14).any())
    throw SingularInput("smw_inverse: inner factor system singular");

  out.flat = e_inv - e_inv_b * inner_solver.solve(e_inv_b.transpose());
  out.flat = 0.5 * (out.flat + out.flat.transpose()).eval();
  return out;
}

CorrelationPair correlation_pair(const KernelMatrix& sigma_y, double kappa) {
  if (kappa <= 0.0) throw std::invalid_argument("correlation_pair: kappa must be > 0");
  require_symmetric(sigma_y, 1e-6, "correlation_pair");
  const int p = sigma_y.p_rows, K = sigma_y.K;

  // Per-series regularized inverse square roots and plain square roots of
  // the diagonal blocks.
  std::vector<Eigen::MatrixXd> d_reg_inv_sqrt(p), d_sqrt(p);
  for (int i = 0; i < p; ++i) {
    Eigen::MatrixXd g = sigma_y.block(i, i);
    g = 0.5 * (g + g.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    if (es.info() != Eigen::Success)
      throw NumericalError("correlation_pair: diagonal block eigendecomposition failed");
    const Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0);
    d_reg_inv_sqrt[i] = es.eigenvectors() *
                        (vals.array() + kappa).rsqrt().matrix().asDiagonal() *
                        es.eigenvectors().transpose();
    d_sqrt[i] = es.eigenvectors() * vals.cwiseSqrt().asDiagonal() *
                es.eigenvectors().transpose();
  }

  CorrelationPair out;
  out.c_hat = KernelMatrix(p, p, K);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      out.c_hat.block(i, j) = d_reg_inv_sqrt[i] * sigma_y.block(i, j) * d_reg_inv_sqrt[j];

  Eigen::MatrixXd reg = sigma_y.flat;
  reg.diagonal().array() += kappa;
  Eigen::LDLT<Eigen::MatrixXd> solver(reg);
  if (solver.info() != Eigen::Success)
    throw SingularInput("correlation_pair: Sigma + kappa I not invertible");
  const Eigen::MatrixXd reg_inv =
      solver.solve(Eigen::MatrixXd::Identity(p * K, p * K));

  out.theta_hat = KernelMatrix(p, p, K);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      out.theta_hat.block(i, j) =
          d_sqrt[i] * reg_inv.block(i * K, j * K, K, K) * d_sqrt[j];
  out.theta_hat.flat = 0.5 * (out.theta_hat.flat + out.theta_hat.flat.transpose()).eval();
  out.c_hat.flat = 0.5 * (out.c_hat.flat + out.c_hat.flat.transpose()).eval();
  return out;
}

}  // namespace fcov
