#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fcov/covariance.hpp"
#include "fcov/errors.hpp"
#include "fcov/sim.hpp"
#include "oracles.hpp"

using namespace fcov;

TEST_CASE("var transition is stationary and the Lyapunov solve is exact") {
  for (int r : {1, 2, 3, 5, 7}) {
    const Eigen::MatrixXd a = var_transition(r);
    const Eigen::VectorXcd eigs = Eigen::EigenSolver<Eigen::MatrixXd>(a).eigenvalues();
    CHECK(eigs.cwiseAbs().maxCoeff() < 1.0);

    const Eigen::MatrixXd q = Eigen::MatrixXd::Identity(r, r) * 0.7;
    const Eigen::MatrixXd s = var_stationary_cov(a, q);
    CHECK((s - (a * s * a.transpose() + q)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("base correlation construction") {
  std::mt19937_64 rng(5);

  SUBCASE("alpha = 1 keeps only the diagonal") {
    const Eigen::MatrixXd c = make_base_correlation(40, 1.0, rng);
    for (int i = 0; i < 40; ++i)
      for (int j = 0; j < 40; ++j)
        if (i != j) CHECK(c(i, j) == 0.0);
  }

  SUBCASE("row support bounded by p^(1-alpha), diagonal counted") {
    const int p = 50;
    for (double alpha : {0.25, 0.5, 0.75}) {
      const Eigen::MatrixXd c = make_base_correlation(p, alpha, rng);
      const int cap = static_cast<int>(std::floor(std::pow(p, 1.0 - alpha) + 1e-9));
      for (int i = 0; i < p; ++i) {
        int support = 0;
        for (int j = 0; j < p; ++j)
          if (c(i, j) != 0.0) ++support;
        CHECK(support <= cap);
      }
    }
  }

  SUBCASE("symmetric positive definite with margin 0.01") {
    const Eigen::MatrixXd c = make_base_correlation(30, 0.5, rng);
    CHECK((c - c.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
    CHECK(es.eigenvalues().minCoeff() >= 0.01 - 1e-10);
  }
}

TEST_CASE("seeded generation replays bit-identically") {
  DgpConfig cfg;
  cfg.dgp = 1;
  cfg.p = 10;
  cfg.n = 20;
  cfg.r = 2;
  cfg.seed = 12345;
  cfg.k_est = 6;
  const SimOutput a = generate(cfg);
  const SimOutput b = generate(cfg);
  CHECK(a.panel.coeffs == b.panel.coeffs);
  CHECK(a.truth.sigma_y.flat == b.truth.sigma_y.flat);

  cfg.seed = 12346;
  const SimOutput c = generate(cfg);
  CHECK(a.panel.coeffs != c.panel.coeffs);
}

TEST_CASE("analytic truth matches the long-run sample covariance") {
  DgpConfig cfg;
  cfg.dgp = 1;
  cfg.p = 20;
  cfg.n = 20000;
  cfg.r = 2;
  cfg.alpha = 0.5;
  cfg.seed = 7;
  cfg.k_est = 10;
  const SimOutput sim = generate(cfg);
  const KernelMatrix cov = sample_cov(center(sim.panel));
  CHECK(loss(cov, sim.truth.sigma_y, NormKind::Smax) < 0.05);
}

TEST_CASE("analytic idiosyncratic truth matches a factor-free long run") {
  // dgp 2 with the common part subtracted via the known loadings: the
  // epsilon panel's covariance converges to sigma_eps.
  DgpConfig cfg;
  cfg.dgp = 2;
  cfg.p = 10;
  cfg.n = 20000;
  cfg.r = 1;
  cfg.alpha = 0.5;
  cfg.seed = 11;
  cfg.k_est = 8;
  cfg.idio_scale = 1.0;
  const SimOutput sim = generate(cfg);
  FunctionalPanel eps(cfg.n, cfg.p, cfg.k_est);
  eps.coeffs = sim.panel.coeffs -
               sim.truth.gamma * sim.truth.functional_loadings.transpose();
  const KernelMatrix cov = sample_cov(center(eps));
  CHECK(loss(cov, sim.truth.sigma_eps, NormKind::Smax) <
        0.05 * kernel_norm(sim.truth.sigma_eps, NormKind::Smax));
}

TEST_CASE("truth is symmetric PSD and sparsity matches the support") {
  DgpConfig cfg;
  cfg.dgp = 2;
  cfg.p = 15;
  cfg.n = 10;
  cfg.r = 2;
  cfg.alpha = 0.75;
  cfg.seed = 3;
  cfg.k_est = 8;
  const SimOutput sim = generate(cfg);

  CHECK((sim.truth.sigma_y.flat - sim.truth.sigma_y.flat.transpose())
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sim.truth.sigma_y.flat);
  CHECK(es.eigenvalues().minCoeff() > -1e-10);

  // s_p under exact sparsity: every row sums sqrt(trace_i trace_j) over the
  // nonzero support of sigma_eps.
  const Eigen::VectorXd traces = trace_diag(sim.truth.sigma_eps);
  const Eigen::MatrixXd hs = sim.truth.sigma_eps.block_hs_norms();
  double expected = 0.0;
  for (int i = 0; i < cfg.p; ++i) {
    double row = 0.0;
    for (int j = 0; j < cfg.p; ++j)
      if (hs(i, j) > 0) row += std::sqrt(traces[i] * traces[j]);
    expected = std::max(expected, row);
  }
  CHECK(sim.truth.s_p_true == doctest::Approx(expected));
  CHECK(sim.truth.truncation_remainder >= 0.0);
  CHECK(sim.truth.truncation_remainder < 0.5);
}

TEST_CASE("loss basics") {
  std::mt19937_64 rng(17);
  const KernelMatrix truth = oracles::random_psd_kernel(4, 3, rng);

  SUBCASE("loss of the truth against itself is zero") {
    CHECK(loss(truth, truth, NormKind::SF) == 0.0);
    CHECK(loss(truth, truth, NormKind::Smax) == 0.0);
    CHECK(loss(truth, truth, NormKind::S1) == 0.0);
  }

  SUBCASE("single perturbed block moves Smax by its HS norm") {
    KernelMatrix est = truth;
    Eigen::MatrixXd bump = oracles::random_matrix(3, 3, rng);
    bump *= 0.3 / bump.norm();
    est.block(1, 2) += bump;
    CHECK(loss(est, truth, NormKind::Smax) == doctest::Approx(0.3).epsilon(1e-10));
  }

  SUBCASE("Smax <= SF on random pairs") {
    for (int rep = 0; rep < 20; ++rep) {
      const KernelMatrix est = oracles::random_psd_kernel(4, 3, rng);
      CHECK(loss(est, truth, NormKind::Smax) <= loss(est, truth, NormKind::SF) + 1e-12);
    }
  }

  SUBCASE("shape mismatch rejected") {
    const KernelMatrix small = oracles::random_psd_kernel(3, 3, rng);
    CHECK_THROWS_AS(loss(small, truth, NormKind::SF), std::invalid_argument);
  }
}

TEST_CASE("config validation") {
  DgpConfig cfg;
  cfg.dgp = 3;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
  cfg.dgp = 1;
  cfg.r = 0;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
  cfg.r = 2;
  cfg.k_est = 60;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
}
