#include "fcov/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fcov/errors.hpp"

namespace fcov {

namespace {

// Innovation draws use one normal stream in a fixed order so that a fixed
// seed replays bit-identically regardless of threading outside.
Eigen::MatrixXd gaussian_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

struct EpsDraw {
  // eps coefficients per (t, series, basis l <= n_eps_basis)
  Eigen::MatrixXd coeffs;  // n x (p * n_eps_basis), series-major
  Eigen::MatrixXd c_zeta;  // p x p
};

EpsDraw draw_idiosyncratic(const DgpConfig& cfg, std::mt19937_64& rng) {
  const int p = cfg.p, n = cfg.n, ne = cfg.n_eps_basis;
  std::gamma_distribution<double> gamma(3.0, 1.0);  // shape-scale
  Eigen::VectorXd d(p);
  const double scale = cfg.resolved_idio_scale();
  for (int i = 0; i < p; ++i) d[i] = scale * gamma(rng);

  const Eigen::MatrixXd c0 = make_base_correlation(p, cfg.alpha, rng);
  EpsDraw out;
  out.c_zeta = d.asDiagonal() * c0 * d.asDiagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(out.c_zeta);
  if (llt.info() != Eigen::Success)
    throw NumericalError("sim: idiosyncratic scale matrix not positive definite");
  const Eigen::MatrixXd chol = llt.matrixL();

  out.coeffs = Eigen::MatrixXd::Zero(n, p * ne);
  for (int t = 0; t < n; ++t) {
    for (int l = 0; l < ne; ++l) {
      const Eigen::VectorXd z = gaussian_matrix(p, 1, rng);
      const Eigen::VectorXd psi = chol * z;
      const double w = std::pow(2.0, -0.5 * (l + 1));
      for (int i = 0; i < p; ++i) out.coeffs(t, i * ne + l) = w * psi[i];
    }
  }
  return out;
}

// VAR(1) chains x_t = A x_{t-1} + sd * z_t, one r-dimensional chain per
// column, zero initialization, burn-in discarded.
std::vector<Eigen::MatrixXd> var_paths(const Eigen::MatrixXd& a, int n, int burn_in,
                                       const Eigen::VectorXd& sds,
                                       std::mt19937_64& rng) {
  const int r = static_cast<int>(a.rows());
  const int chains = static_cast<int>(sds.size());
  Eigen::MatrixXd state = Eigen::MatrixXd::Zero(r, chains);
  std::vector<Eigen::MatrixXd> out(n);
  for (int t = -burn_in; t < n; ++t) {
    const Eigen::MatrixXd z = gaussian_matrix(r, chains, rng);
    state = a * state + z * sds.asDiagonal();
    if (t >= 0) out[t] = state;
  }
  return out;
}

// Exact functional sparsity (q = 0): max_i sum over nonzero blocks of
// sqrt(|sigma_i|_N |sigma_j|_N).
double exact_sparsity(const KernelMatrix& sigma_eps) {
  const Eigen::VectorXd traces = trace_diag(sigma_eps);
  const Eigen::MatrixXd hs = sigma_eps.block_hs_norms();
  double worst = 0.0;
  for (int i = 0; i < sigma_eps.p_rows; ++i) {
    double row = 0.0;
    for (int j = 0; j < sigma_eps.p_cols; ++j)
      if (hs(i, j) > 0.0) row += std::sqrt(traces[i] * traces[j]);
    worst = std::max(worst, row);
  }
  return worst;
}

void fill_eps_truth(KernelMatrix& sigma, const Eigen::MatrixXd& c_zeta, int ne) {
  const int p = sigma.p_rows, K = sigma.K;
  const int levels = std::min(ne, K);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      for (int l = 0; l < levels; ++l)
        sigma.block(i, j)(l, l) += std::pow(2.0, -(l + 1.0)) * c_zeta(i, j);
}

}  // namespace

Eigen::MatrixXd var_transition(int r) {
  Eigen::MatrixXd a(r, r);
  for (int j = 0; j < r; ++j)
    for (int k = 0; k < r; ++k) a(j, k) = std::pow(0.4, std::abs(j - k) + 1);
  return a;
}

Eigen::MatrixXd var_stationary_cov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
  const int r = static_cast<int>(a.rows());
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(r * r, r * r);
  // I - kron(A, A)
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k)
        for (int l = 0; l < r; ++l)
          lhs(i * r + k, j * r + l) -= a(i, j) * a(k, l);
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(q.data(), r * r);
  const Eigen::VectorXd vec = lhs.partialPivLu().solve(rhs);
  Eigen::MatrixXd s = Eigen::Map<const Eigen::MatrixXd>(vec.data(), r, r);
  return 0.5 * (s + s.transpose());
}

Eigen::MatrixXd make_base_correlation(int p, double alpha, std::mt19937_64& rng) {
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("sim: alpha must be in [0, 1]");
  std::uniform_real_distribution<double> unif(0.0, 0.5);
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) c(i, j) = c(j, i) = unif(rng);

  // Smallest hard-threshold level such that every row keeps at most
  // p^(1-alpha) entries, the diagonal included.
  const int cap = static_cast<int>(std::floor(std::pow(p, 1.0 - alpha) + 1e-9));
  if (cap < 1) throw DegenerateConfig("sim: sparsity cap below 1");
  double level = 0.0;
  std::vector<double> row(p - 1);
  for (int i = 0; i < p; ++i) {
    int idx = 0;
    for (int j = 0; j < p; ++j)
      if (j != i) row[idx++] = c(i, j);
    std::sort(row.begin(), row.end(), std::greater<double>());
    const int keep = cap - 1;  // off-diagonal budget
    if (keep < static_cast<int>(row.size()))
      level = std::max(level, keep >= 0 ? row[keep] : row[0]);
  }
  Eigen::MatrixXd thr = c;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (i != j && thr(i, j) <= level) thr(i, j) = 0.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(thr);
  const double lambda_min = es.eigenvalues().minCoeff();
  const double delta = std::max(-lambda_min, 0.0) + 0.01;
  thr.diagonal().array() += delta;
  return thr;
}

SimOutput generate(const DgpConfig& cfg) {
  if (cfg.dgp != 1 && cfg.dgp != 2) throw std::invalid_argument("sim: dgp must be 1 or 2");
  if (cfg.r < 1) throw std::invalid_argument("sim: r must be >= 1");
  if (cfg.n < 2 || cfg.p < 1) throw std::invalid_argument("sim: n >= 2 and p >= 1 required");
  if (cfg.k_est < 1 || cfg.k_est > cfg.n_factor_basis)
    throw std::invalid_argument("sim: k_est must be in [1, n_factor_basis]");

  const int p = cfg.p, n = cfg.n, r = cfg.r;
  const int nf = cfg.n_factor_basis, ne = cfg.n_eps_basis, K = cfg.k_est;
  std::mt19937_64 rng(cfg.seed);

  const Eigen::MatrixXd a = var_transition(r);
  {
    const Eigen::VectorXcd eigs = Eigen::EigenSolver<Eigen::MatrixXd>(a).eigenvalues();
    if (eigs.cwiseAbs().maxCoeff() >= 1.0)
      throw NumericalError("sim: VAR transition not stationary");
  }

  SimOutput out;
  out.panel = FunctionalPanel(n, p, K);
  out.truth.sigma_y = KernelMatrix(p, p, K);
  out.truth.sigma_eps = KernelMatrix(p, p, K);

  // Cross-moment bookkeeping for the truncation remainder: total SF mass of
  // the full-basis truth versus its K-truncation.
  double sf_full_sq = 0.0, sf_trunc_sq = 0.0;

  if (cfg.dgp == 1) {
    // Loadings, then factor chains, then the idiosyncratic part.
    std::uniform_real_distribution<double> unif(-0.75, 0.75);
    Eigen::MatrixXd b(p, r);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < r; ++j) b(i, j) = unif(rng);

    Eigen::VectorXd sds(nf);
    for (int i = 0; i < nf; ++i) sds[i] = 1.0 / (i + 1.0);
    const std::vector<Eigen::MatrixXd> xi = var_paths(a, n, cfg.burn_in, sds, rng);
    const EpsDraw eps = draw_idiosyncratic(cfg, rng);

    out.truth.factors = FunctionalPanel(n, r, K);
    for (int t = 0; t < n; ++t)
      for (int j = 0; j < r; ++j)
        for (int k = 0; k < K; ++k)
          out.truth.factors.coeffs(t, j * K + k) = xi[t](j, k);

    for (int t = 0; t < n; ++t) {
      // y_ti[k] = sum_j B_ij xi[t](j, k) + eps_ti[k]
      const Eigen::MatrixXd common = b * xi[t];  // p x nf
      for (int i = 0; i < p; ++i) {
        for (int k = 0; k < K; ++k) {
          double v = common(i, k);
          if (k < ne) v += eps.coeffs(t, i * ne + k);
          out.panel.coeffs(t, i * K + k) = v;
        }
      }
    }

    // Truth: Sigma_f from the per-chain stationary covariances, Sigma_eps
    // analytic, common part B Sigma_f B^T.
    std::vector<Eigen::MatrixXd> sf(nf);
    for (int i = 0; i < nf; ++i)
      sf[i] = var_stationary_cov(a, Eigen::MatrixXd::Identity(r, r) / ((i + 1.0) * (i + 1.0)));

    fill_eps_truth(out.truth.sigma_eps, eps.c_zeta, ne);
    out.truth.sigma_y.flat = out.truth.sigma_eps.flat;
    for (int bidx = 0; bidx < K; ++bidx) {
      const Eigen::MatrixXd block = b * sf[bidx] * b.transpose();  // p x p
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
          out.truth.sigma_y.block(i, j)(bidx, bidx) += block(i, j);
    }
    out.truth.scalar_loadings = b;

    const double ezz = eps.c_zeta.squaredNorm();
    for (int bidx = 0; bidx < nf; ++bidx) {
      const Eigen::MatrixXd block = b * sf[bidx] * b.transpose();
      double term = block.squaredNorm();
      if (bidx < ne) {
        const double w = std::pow(2.0, -(bidx + 1.0));
        term += 2.0 * w * block.cwiseProduct(eps.c_zeta).sum() + w * w * ezz;
      }
      sf_full_sq += term;
      if (bidx < K) sf_trunc_sq += term;
    }
  } else {
    // Scalar factors with functional loadings.
    const std::vector<Eigen::MatrixXd> gamma_path =
        var_paths(a, n, cfg.burn_in, Eigen::VectorXd::Ones(1), rng);
    std::normal_distribution<double> q_normal(0.0, 0.3);
    // q[l]: p x r coefficients at basis index l, scaled by (l+1)^-1.
    std::vector<Eigen::MatrixXd> q(nf);
    for (int l = 0; l < nf; ++l) {
      q[l].resize(p, r);
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < r; ++j) q[l](i, j) = q_normal(rng) / (l + 1.0);
    }
    const EpsDraw eps = draw_idiosyncratic(cfg, rng);

    out.truth.gamma.resize(n, r);
    for (int t = 0; t < n; ++t) out.truth.gamma.row(t) = gamma_path[t].col(0).transpose();

    for (int t = 0; t < n; ++t) {
      const Eigen::VectorXd g = gamma_path[t].col(0);
      for (int k = 0; k < K; ++k) {
        const Eigen::VectorXd common = q[k] * g;  // p
        for (int i = 0; i < p; ++i) {
          double v = common[i];
          if (k < ne) v += eps.coeffs(t, i * ne + k);
          out.panel.coeffs(t, i * K + k) = v;
        }
      }
    }

    const Eigen::MatrixXd sigma_gamma =
        var_stationary_cov(a, Eigen::MatrixXd::Identity(r, r));
    fill_eps_truth(out.truth.sigma_eps, eps.c_zeta, ne);

    // Common part blocks: (i,j) kernel = sum_{l,m} q[l](i,:) Sg q[m](j,:)^T
    // at basis pair (l, m).
    out.truth.functional_loadings.resize(p * K, r);
    for (int l = 0; l < K; ++l)
      for (int i = 0; i < p; ++i)
        out.truth.functional_loadings.row(i * K + l) = q[l].row(i);

    out.truth.sigma_y.flat =
        out.truth.functional_loadings * sigma_gamma *
            out.truth.functional_loadings.transpose() +
        out.truth.sigma_eps.flat;

    // SF masses without materializing the full-basis kernel: the common
    // part contributes tr((G Sg)^2) with G the full Gram of loadings.
    Eigen::MatrixXd gram_full = Eigen::MatrixXd::Zero(r, r);
    Eigen::MatrixXd gram_trunc = Eigen::MatrixXd::Zero(r, r);
    for (int l = 0; l < nf; ++l) {
      gram_full += q[l].transpose() * q[l];
      if (l < K) gram_trunc += q[l].transpose() * q[l];
    }
    const double ezz = eps.c_zeta.squaredNorm();
    auto common_mass = [&](const Eigen::MatrixXd& gram) {
      return (gram * sigma_gamma * gram * sigma_gamma).trace();
    };
    sf_full_sq = common_mass(gram_full);
    sf_trunc_sq = common_mass(gram_trunc);
    for (int l = 0; l < ne; ++l) {
      const double w = std::pow(2.0, -(l + 1.0));
      const Eigen::MatrixXd cross = q[l] * sigma_gamma * q[l].transpose();
      const double term = 2.0 * w * cross.cwiseProduct(eps.c_zeta).sum() + w * w * ezz;
      sf_full_sq += term;
      if (l < K) sf_trunc_sq += term;
    }
  }

  out.truth.sigma_y.flat =
      0.5 * (out.truth.sigma_y.flat + out.truth.sigma_y.flat.transpose()).eval();
  out.truth.s_p_true = exact_sparsity(out.truth.sigma_eps);
  out.truth.truncation_remainder =
      sf_full_sq > 0.0
          ? std::sqrt(std::max(sf_full_sq - sf_trunc_sq, 0.0) / sf_full_sq)
          : 0.0;
  return out;
}

double loss(const KernelMatrix& estimate, const KernelMatrix& truth, NormKind which) {
  if (estimate.p_rows != truth.p_rows || estimate.p_cols != truth.p_cols ||
      estimate.K != truth.K)
    throw std::invalid_argument("loss: shape mismatch");
  return kernel_norm(estimate - truth, which);
}

}  // namespace fcov
