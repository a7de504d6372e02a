#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fcov/basis.hpp"
#include "fcov/covariance.hpp"
#include "fcov/errors.hpp"
#include "fcov/kernel.hpp"
#include "oracles.hpp"

using namespace fcov;

TEST_CASE("fourier K=1 is the constant function with Gram [1]") {
  const BasisSpec b = make_basis(BasisKind::Fourier, 1, 51);
  CHECK(b.values.col(0).isApproxToConstant(1.0));
  CHECK(b.gram()(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("fourier K=3 Gram is identity within 1e-8") {
  const BasisSpec b = make_basis(BasisKind::Fourier, 3, 51);
  CHECK((b.gram() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("orthonormalized B-splines K=10 Gram is identity within 1e-8") {
  const BasisSpec b = make_basis(BasisKind::BsplineOrthonormal, 10, 101);
  CHECK((b.gram() - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("quadrature weights sum to 1 and basis construction validates input") {
  const BasisSpec b = make_basis(BasisKind::Fourier, 5, 51);
  CHECK(b.quad_weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(make_basis(BasisKind::Fourier, 0, 51), std::invalid_argument);
  CHECK_THROWS_AS(make_basis(BasisKind::Fourier, 10, 12), std::invalid_argument);
}

TEST_CASE("projection reproduces a basis function exactly") {
  const BasisSpec b = make_basis(BasisKind::Fourier, 5, 51);
  GridPanel samples;
  samples.n = 1;
  samples.p = 1;
  samples.values = b.values.col(2).transpose();  // phi_3 itself
  const auto res = project(samples, b);
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(5);
  expected[2] = 1.0;
  CHECK((res.panel.series_coeffs(0, 0) - expected).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(res.max_relative_error < 1e-8);
}

TEST_CASE("projection of the zero panel is zero") {
  const BasisSpec b = make_basis(BasisKind::Fourier, 4, 51);
  GridPanel samples;
  samples.n = 2;
  samples.p = 3;
  samples.values = Eigen::MatrixXd::Zero(6, 51);
  const auto res = project(samples, b);
  CHECK(res.panel.coeffs.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("projection of u matches a dense-grid least squares fit within 1e-3") {
  const BasisSpec b = make_basis(BasisKind::Fourier, 5, 51);
  GridPanel samples;
  samples.n = 1;
  samples.p = 1;
  samples.values = b.grid.transpose();
  const auto res = project(samples, b);

  const BasisSpec dense = make_basis(BasisKind::Fourier, 5, 4001);
  const Eigen::VectorXd oracle = project_curve(dense.grid, dense);
  CHECK((res.panel.series_coeffs(0, 0) - oracle).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("projection rejects a mismatched grid") {
  const BasisSpec b = make_basis(BasisKind::Fourier, 4, 51);
  GridPanel samples;
  samples.n = 1;
  samples.p = 1;
  samples.values = Eigen::MatrixXd::Zero(1, 50);
  CHECK_THROWS_AS(project(samples, b), std::invalid_argument);
}

TEST_CASE("inner product equals the coefficient dot product and the quadrature") {
  CHECK(inner_product(Eigen::VectorXd::Unit(4, 0), Eigen::VectorXd::Unit(4, 0)) == 1.0);
  CHECK(inner_product(Eigen::VectorXd::Unit(4, 0), Eigen::VectorXd::Unit(4, 1)) == 0.0);
  CHECK_THROWS_AS(inner_product(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(4)),
                  std::invalid_argument);

  const BasisSpec b = make_basis(BasisKind::Fourier, 4, 51);
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::VectorXd f = oracles::random_matrix(4, 1, rng);
    const Eigen::VectorXd g = oracles::random_matrix(4, 1, rng);
    CHECK(inner_product(f, g) ==
          doctest::Approx(oracles::inner_product_quadrature(f, g, b)).epsilon(1e-6));
  }
}

TEST_CASE("kernel norms: single block and identity cases") {
  KernelMatrix m(3, 3, 2);
  m.block(1, 2) << 2.0, 0.0, 0.0, 0.0;  // HS norm 2
  CHECK(kernel_norm(m, NormKind::S1) == doctest::Approx(2.0));
  CHECK(kernel_norm(m, NormKind::Sinf) == doctest::Approx(2.0));
  CHECK(kernel_norm(m, NormKind::SF) == doctest::Approx(2.0));
  CHECK(kernel_norm(m, NormKind::Smax) == doctest::Approx(2.0));

  KernelMatrix ident(3, 3, 2);
  ident.flat.setIdentity();
  CHECK(kernel_norm(ident, NormKind::L) == doctest::Approx(1.0));

  CHECK_THROWS_AS(parse_norm_kind("bogus"), std::invalid_argument);
  CHECK_THROWS_AS(parse_norm_kind("trace-diag"), std::invalid_argument);
}

TEST_CASE("norm inequalities hold on random kernel matrices") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 30; ++rep) {
    const KernelMatrix m = oracles::random_kernel(3, 3, 2, rng);
    const double smax = kernel_norm(m, NormKind::Smax);
    const double sf = kernel_norm(m, NormKind::SF);
    const double l = kernel_norm(m, NormKind::L);
    const double s1 = kernel_norm(m, NormKind::S1);
    const double sinf = kernel_norm(m, NormKind::Sinf);
    CHECK(smax <= sf + 1e-12);
    CHECK(l <= std::sqrt(s1 * sinf) + 1e-12);
  }
}

TEST_CASE("trace-diag returns diagonal block traces") {
  KernelMatrix m(2, 2, 3);
  m.block(0, 0) = Eigen::MatrixXd::Identity(3, 3) * 2.0;
  m.block(1, 1) << 1, 0, 0, 0, 2, 0, 0, 0, 3;
  const Eigen::VectorXd tr = trace_diag(m);
  CHECK(tr[0] == doctest::Approx(6.0));
  CHECK(tr[1] == doctest::Approx(6.0));
}

TEST_CASE("mercer eigen: rank one, zero, and full reconstruction") {
  std::mt19937_64 rng(3);
  const int p = 3, K = 3;

  SUBCASE("rank-one kernel returns its eigenpair up to sign") {
    Eigen::VectorXd phi = oracles::random_matrix(p * K, 1, rng);
    phi.normalize();
    KernelMatrix m(p, p, K);
    m.flat = 1.7 * phi * phi.transpose();
    const MercerEigen e = mercer_eigen(m, 1);
    CHECK(e.values[0] == doctest::Approx(1.7).epsilon(1e-10));
    CHECK(std::abs(std::abs(e.functions.col(0).dot(phi)) - 1.0) < 1e-10);
  }

  SUBCASE("zero kernel has zero spectrum") {
    KernelMatrix m(p, p, K);
    const MercerEigen e = mercer_eigen(m, p * K);
    CHECK(e.values.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("full-rank reconstruction within 1e-8 SF") {
    const KernelMatrix m = oracles::random_psd_kernel(p, K, rng);
    const MercerEigen e = mercer_eigen(m, p * K);
    Eigen::MatrixXd rec = Eigen::MatrixXd::Zero(p * K, p * K);
    for (int j = 0; j < p * K; ++j)
      rec += e.values[j] * e.functions.col(j) * e.functions.col(j).transpose();
    CHECK((rec - m.flat).norm() < 1e-8);
  }

  SUBCASE("eigenfunctions are orthonormal and sign-fixed") {
    const KernelMatrix m = oracles::random_psd_kernel(p, K, rng);
    const MercerEigen e = mercer_eigen(m, 4);
    CHECK((e.functions.transpose() * e.functions - Eigen::MatrixXd::Identity(4, 4))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    for (int j = 0; j < 4; ++j) {
      int idx = 0;
      e.functions.col(j).cwiseAbs().maxCoeff(&idx);
      CHECK(e.functions(idx, j) > 0.0);
    }
  }

  SUBCASE("non-symmetric input rejected") {
    KernelMatrix m = oracles::random_kernel(p, p, K, rng);
    m.flat(0, 1) += 1.0;
    CHECK_THROWS_AS(mercer_eigen(m, 1), std::invalid_argument);
  }
}

TEST_CASE("apply_kernel: identity, rank-one action, quadrature agreement") {
  std::mt19937_64 rng(5);
  const int K = 3;

  KernelMatrix ident(2, 2, K);
  ident.flat.setIdentity();
  const Eigen::VectorXd x = oracles::random_matrix(2 * K, 1, rng);
  CHECK((apply_kernel(ident, x) - x).cwiseAbs().maxCoeff() < 1e-14);

  Eigen::VectorXd phi = oracles::random_matrix(2 * K, 1, rng);
  Eigen::VectorXd psi = oracles::random_matrix(2 * K, 1, rng);
  psi.normalize();
  KernelMatrix rank_one(2, 2, K);
  rank_one.flat = phi * psi.transpose();
  CHECK((apply_kernel(rank_one, psi) - phi).cwiseAbs().maxCoeff() < 1e-12);

  const BasisSpec b = make_basis(BasisKind::Fourier, K, 51);
  for (int rep = 0; rep < 10; ++rep) {
    const KernelMatrix m = oracles::random_kernel(2, 2, K, rng);
    const Eigen::VectorXd v = oracles::random_matrix(2 * K, 1, rng);
    const Eigen::VectorXd direct = apply_kernel(m, v);
    const Eigen::VectorXd quad = oracles::apply_kernel_quadrature(m, v, b);
    CHECK((direct - quad).cwiseAbs().maxCoeff() < 1e-6);
  }

  CHECK_THROWS_AS(apply_kernel(ident, Eigen::VectorXd::Zero(5)), std::invalid_argument);
}

TEST_CASE("kernel block HS norm equals flattened Frobenius norm") {
  std::mt19937_64 rng(13);
  const KernelMatrix m = oracles::random_kernel(2, 2, 4, rng);
  double acc = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) acc += m.block(i, j).squaredNorm();
  CHECK(std::sqrt(acc) == doctest::Approx(kernel_norm(m, NormKind::SF)).epsilon(1e-12));
}
