#pragma once

#include <Eigen/Dense>
#include <string>

namespace fcov {

// Operator-valued matrix: p_rows x p_cols array of K x K coefficient blocks
// stored as one flattened (p_rows*K) x (p_cols*K) matrix. Block (i, j) holds
// the tensor-basis coefficients of the kernel K_ij(u, v); its Frobenius norm
// equals the Hilbert-Schmidt norm of the kernel.
struct KernelMatrix {
  int p_rows{0}, p_cols{0}, K{0};
  Eigen::MatrixXd flat;

  KernelMatrix() = default;
  KernelMatrix(int pr, int pc, int K_)
      : p_rows(pr), p_cols(pc), K(K_), flat(Eigen::MatrixXd::Zero(pr * K_, pc * K_)) {}

  bool square() const { return p_rows == p_cols; }

  Eigen::Block<Eigen::MatrixXd, -1, -1> block(int i, int j) {
    return flat.block(i * K, j * K, K, K);
  }
  Eigen::Block<const Eigen::MatrixXd, -1, -1> block(int i, int j) const {
    return flat.block(i * K, j * K, K, K);
  }

  // p_rows x p_cols matrix of blockwise Hilbert-Schmidt norms.
  Eigen::MatrixXd block_hs_norms() const;
};

KernelMatrix operator+(const KernelMatrix& a, const KernelMatrix& b);
KernelMatrix operator-(const KernelMatrix& a, const KernelMatrix& b);
KernelMatrix operator*(double s, const KernelMatrix& a);

enum class NormKind { S1, Sinf, SF, Smax, L };

// Parses one of: S1, Sinf, SF, Smax, L. "trace-diag" is a vector-valued
// summary served by trace_diag(); any other tag throws invalid_argument.
NormKind parse_norm_kind(const std::string& tag);

double kernel_norm(const KernelMatrix& m, NormKind which);

// Trace norms of the diagonal kernels: trace of each diagonal block.
Eigen::VectorXd trace_diag(const KernelMatrix& m);

struct MercerEigen {
  Eigen::VectorXd values;     // m, descending
  Eigen::MatrixXd functions;  // (p*K) x m, orthonormal columns, sign-fixed
};

// Leading eigenpairs of a symmetric PSD operator-valued matrix. Signs fixed
// so the largest-magnitude coefficient of each eigenfunction is positive.
MercerEigen mercer_eigen(const KernelMatrix& m, int count);

// Integral-operator action in coefficient space: y = flat * x.
Eigen::VectorXd apply_kernel(const KernelMatrix& m, const Eigen::VectorXd& x);

void require_symmetric(const KernelMatrix& m, double tol, const char* where);

// Fixes eigenvector signs in-place: largest-magnitude entry positive.
void fix_signs(Eigen::MatrixXd& vectors);

}  // namespace fcov
