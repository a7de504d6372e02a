#include "fcov/basis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fcov/errors.hpp"

namespace fcov {

namespace {

constexpr double kOrthoTol = 1e-8;

Eigen::VectorXd uniform_grid(int points) {
  return Eigen::VectorXd::LinSpaced(points, 0.0, 1.0);
}

// Composite trapezoid weights on an arbitrary strictly increasing grid.
Eigen::VectorXd trapezoid_weights(const Eigen::VectorXd& grid) {
  const int g = static_cast<int>(grid.size());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(g);
  for (int i = 0; i + 1 < g; ++i) {
    const double h = grid[i + 1] - grid[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

Eigen::MatrixXd fourier_values(const Eigen::VectorXd& grid, int K) {
  const int g = static_cast<int>(grid.size());
  Eigen::MatrixXd v(g, K);
  const double sqrt2 = std::numbers::sqrt2;
  for (int k = 0; k < K; ++k) {
    if (k == 0) {
      v.col(k).setOnes();
    } else {
      const int m = (k + 1) / 2;
      const double freq = 2.0 * std::numbers::pi * m;
      if (k % 2 == 1) {
        v.col(k) = (freq * grid.array()).cos() * sqrt2;
      } else {
        v.col(k) = (freq * grid.array()).sin() * sqrt2;
      }
    }
  }
  return v;
}

// Cox-de Boor evaluation of a clamped B-spline basis with K functions of
// the given order on [0,1].
Eigen::MatrixXd bspline_values(const Eigen::VectorXd& grid, int K, int order) {
  const int g = static_cast<int>(grid.size());
  const int n_interior = K - order;
  std::vector<double> knots;
  knots.reserve(K + order);
  for (int i = 0; i < order; ++i) knots.push_back(0.0);
  for (int i = 1; i <= n_interior; ++i)
    knots.push_back(static_cast<double>(i) / (n_interior + 1));
  for (int i = 0; i < order; ++i) knots.push_back(1.0);

  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(g, K);
  const int n_knots = static_cast<int>(knots.size());
  std::vector<double> b(n_knots - 1), b_next(n_knots - 1);
  for (int gi = 0; gi < g; ++gi) {
    const double u = grid[gi];
    // Degree 0.
    for (int i = 0; i + 1 < n_knots; ++i) {
      const bool last_span = knots[i + 1] >= 1.0 && u >= 1.0 && knots[i] < 1.0;
      b[i] = ((u >= knots[i] && u < knots[i + 1]) || last_span) ? 1.0 : 0.0;
    }
    for (int d = 1; d < order; ++d) {
      for (int i = 0; i + d + 1 < n_knots; ++i) {
        double left = 0.0, right = 0.0;
        if (knots[i + d] > knots[i])
          left = (u - knots[i]) / (knots[i + d] - knots[i]) * b[i];
        if (knots[i + d + 1] > knots[i + 1])
          right = (knots[i + d + 1] - u) / (knots[i + d + 1] - knots[i + 1]) * b[i + 1];
        b_next[i] = left + right;
      }
      std::swap(b, b_next);
    }
    for (int k = 0; k < K; ++k) v(gi, k) = b[k];
  }
  return v;
}

// Orthonormalizes columns against the quadrature inner product via the
// Cholesky factor of the Gram matrix.
void orthonormalize(Eigen::MatrixXd& values, const Eigen::VectorXd& weights) {
  Eigen::MatrixXd gram =
      values.transpose() * weights.asDiagonal() * values;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw NumericalError("basis: Gram matrix not positive definite; "
                         "increase the grid resolution");
  values = llt.matrixL().solve(values.transpose()).transpose();
}

}  // namespace

std::string to_string(BasisKind kind) {
  return kind == BasisKind::Fourier ? "fourier" : "bspline-orthonormalized";
}

BasisKind parse_basis_kind(const std::string& tag) {
  if (tag == "fourier") return BasisKind::Fourier;
  if (tag == "bspline-orthonormalized" || tag == "bspline")
    return BasisKind::BsplineOrthonormal;
  throw std::invalid_argument("unknown basis kind: " + tag);
}

Eigen::MatrixXd BasisSpec::gram() const {
  return values.transpose() * quad_weights.asDiagonal() * values;
}

Eigen::VectorXd BasisSpec::constant_coeffs() const {
  return values.transpose() * quad_weights;
}

BasisSpec make_basis(BasisKind kind, int K, int grid_points) {
  return make_basis(kind, K, uniform_grid(grid_points));
}

BasisSpec make_basis(BasisKind kind, int K, Eigen::VectorXd grid) {
  if (K < 1) throw std::invalid_argument("basis: K must be >= 1");
  const int g = static_cast<int>(grid.size());
  if (g < 2 * K + 1)
    throw std::invalid_argument("basis: grid must have at least 2K+1 points");
  for (int i = 0; i + 1 < g; ++i)
    if (!(grid[i] < grid[i + 1]))
      throw std::invalid_argument("basis: grid must be strictly increasing");
  if (grid[0] < -1e-12 || grid[g - 1] > 1.0 + 1e-12)
    throw std::invalid_argument("basis: grid must lie in [0,1]");

  BasisSpec spec;
  spec.kind = kind;
  spec.K = K;
  spec.grid = std::move(grid);
  spec.quad_weights = trapezoid_weights(spec.grid);

  if (kind == BasisKind::Fourier) {
    spec.values = fourier_values(spec.grid, K);
  } else {
    const int order = std::min(4, K);
    spec.values = bspline_values(spec.grid, K, order);
    orthonormalize(spec.values, spec.quad_weights);
  }

  const double gram_err = (spec.gram() - Eigen::MatrixXd::Identity(K, K))
                              .cwiseAbs()
                              .maxCoeff();
  if (gram_err > kOrthoTol)
    throw NumericalError("basis: orthonormality failed, max |Gram - I| = " +
                         std::to_string(gram_err));
  return spec;
}

ProjectionResult project(const GridPanel& samples, const BasisSpec& spec) {
  if (samples.grid_size() != spec.grid_size())
    throw std::invalid_argument("project: sample grid does not match basis grid");
  ProjectionResult out;
  out.panel.n = samples.n;
  out.panel.p = samples.p;
  out.panel.K = spec.K;
  // (n*p) x K coefficients, then reshaped to n x (p*K).
  const Eigen::MatrixXd proj = spec.quad_weights.asDiagonal() * spec.values;
  const Eigen::MatrixXd coeffs = samples.values * proj;
  out.panel.coeffs.resize(samples.n, samples.p * spec.K);
  for (int t = 0; t < samples.n; ++t)
    for (int i = 0; i < samples.p; ++i)
      out.panel.coeffs.row(t).segment(i * spec.K, spec.K) = coeffs.row(t * samples.p + i);

  const Eigen::MatrixXd recon = coeffs * spec.values.transpose();
  double worst = 0.0;
  for (int row = 0; row < recon.rows(); ++row) {
    const Eigen::VectorXd diff = (samples.values.row(row) - recon.row(row)).transpose();
    const Eigen::VectorXd orig = samples.values.row(row).transpose();
    const double num = std::sqrt(diff.array().square().matrix().dot(spec.quad_weights));
    const double den = std::sqrt(orig.array().square().matrix().dot(spec.quad_weights));
    if (den > 0) worst = std::max(worst, num / den);
  }
  out.max_relative_error = worst;
  return out;
}

GridPanel evaluate(const FunctionalPanel& panel, const BasisSpec& spec) {
  if (panel.K != spec.K)
    throw std::invalid_argument("evaluate: panel K does not match basis K");
  GridPanel out;
  out.n = panel.n;
  out.p = panel.p;
  out.values.resize(panel.n * panel.p, spec.grid_size());
  for (int t = 0; t < panel.n; ++t)
    for (int i = 0; i < panel.p; ++i)
      out.values.row(t * panel.p + i) =
          (spec.values * panel.series_coeffs(t, i)).transpose();
  return out;
}

Eigen::VectorXd project_curve(const Eigen::VectorXd& samples, const BasisSpec& spec) {
  if (samples.size() != spec.grid_size())
    throw std::invalid_argument("project_curve: grid mismatch");
  return spec.values.transpose() * (spec.quad_weights.asDiagonal() * samples);
}

Eigen::VectorXd evaluate_curve(const Eigen::VectorXd& coeffs, const BasisSpec& spec) {
  if (coeffs.size() != spec.K)
    throw std::invalid_argument("evaluate_curve: coefficient size mismatch");
  return spec.values * coeffs;
}

double inner_product(const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
  if (f.size() != g.size())
    throw std::invalid_argument("inner_product: dimension mismatch");
  return f.dot(g);
}

}  // namespace fcov
