#pragma once

#include <Eigen/Dense>
#include <string>

namespace fcov {

enum class BasisKind { Fourier, BsplineOrthonormal };

std::string to_string(BasisKind kind);
BasisKind parse_basis_kind(const std::string& tag);

// Orthonormal basis of dimension K on U = [0,1], held together with the
// quadrature grid used for all grid-space operations. The stored values
// satisfy values^T * diag(quad_weights) * values = I_K to 1e-8; B-splines
// are orthonormalized against the quadrature at construction.
struct BasisSpec {
  BasisKind kind{BasisKind::Fourier};
  int K{0};
  Eigen::VectorXd grid;          // G strictly increasing points in [0,1]
  Eigen::VectorXd quad_weights;  // trapezoid weights, sum to 1
  Eigen::MatrixXd values;        // G x K, basis functions evaluated on grid

  int grid_size() const { return static_cast<int>(grid.size()); }
  Eigen::MatrixXd gram() const;
  // Coefficients of the constant function 1 (exactly representable for both
  // supported bases).
  Eigen::VectorXd constant_coeffs() const;
};

BasisSpec make_basis(BasisKind kind, int K, int grid_points);
BasisSpec make_basis(BasisKind kind, int K, Eigen::VectorXd grid);

// n x p panel of curves in coefficient space; row t holds the p curves of
// time t, series i occupying columns [i*K, (i+1)*K).
struct FunctionalPanel {
  int n{0}, p{0}, K{0};
  Eigen::MatrixXd coeffs;  // n x (p*K)

  FunctionalPanel() = default;
  FunctionalPanel(int n_, int p_, int K_)
      : n(n_), p(p_), K(K_), coeffs(Eigen::MatrixXd::Zero(n_, p_ * K_)) {}

  Eigen::VectorXd series_coeffs(int t, int i) const { return coeffs.row(t).segment(i * K, K); }
};

// Grid-space panel: row t*p + i holds curve (t, i) sampled on the grid.
struct GridPanel {
  int n{0}, p{0};
  Eigen::MatrixXd values;  // (n*p) x G

  int grid_size() const { return static_cast<int>(values.cols()); }
  double at(int t, int i, int g) const { return values(t * p + i, g); }
};

struct ProjectionResult {
  FunctionalPanel panel;
  double max_relative_error{0.0};  // worst per-curve L2 reconstruction error
};

// Projects grid samples onto the basis: c[k] = sum_g w_g phi_k(u_g) s_g.
ProjectionResult project(const GridPanel& samples, const BasisSpec& spec);

// Evaluates a coefficient panel back on the basis grid.
GridPanel evaluate(const FunctionalPanel& panel, const BasisSpec& spec);

Eigen::VectorXd project_curve(const Eigen::VectorXd& samples, const BasisSpec& spec);
Eigen::VectorXd evaluate_curve(const Eigen::VectorXd& coeffs, const BasisSpec& spec);

// L2(U) inner product of two curves of the same basis: the coefficient dot
// product, by orthonormality.
double inner_product(const Eigen::VectorXd& f, const Eigen::VectorXd& g);

}  // namespace fcov
