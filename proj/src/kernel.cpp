#include "fcov/kernel.hpp"

#include <stdexcept>

#include "fcov/errors.hpp"

namespace fcov {

namespace {

void require_same_shape(const KernelMatrix& a, const KernelMatrix& b) {
  if (a.p_rows != b.p_rows || a.p_cols != b.p_cols || a.K != b.K)
    throw std::invalid_argument("kernel: shape mismatch");
}

}  // namespace

Eigen::MatrixXd KernelMatrix::block_hs_norms() const {
  Eigen::MatrixXd out(p_rows, p_cols);
  for (int i = 0; i < p_rows; ++i)
    for (int j = 0; j < p_cols; ++j) out(i, j) = block(i, j).norm();
  return out;
}

KernelMatrix operator+(const KernelMatrix& a, const KernelMatrix& b) {
  require_same_shape(a, b);
  KernelMatrix out = a;
  out.flat += b.flat;
  return out;
}

KernelMatrix operator-(const KernelMatrix& a, const KernelMatrix& b) {
  require_same_shape(a, b);
  KernelMatrix out = a;
  out.flat -= b.flat;
  return out;
}

KernelMatrix operator*(double s, const KernelMatrix& a) {
  KernelMatrix out = a;
  out.flat *= s;
  return out;
}

NormKind parse_norm_kind(const std::string& tag) {
  if (tag == "S1") return NormKind::S1;
  if (tag == "Sinf") return NormKind::Sinf;
  if (tag == "SF") return NormKind::SF;
  if (tag == "Smax") return NormKind::Smax;
  if (tag == "L") return NormKind::L;
  throw std::invalid_argument("unknown norm tag: " + tag +
                              " (expected S1, Sinf, SF, Smax, or L; "
                              "trace-diag is served by trace_diag)");
}

double kernel_norm(const KernelMatrix& m, NormKind which) {
  switch (which) {
    case NormKind::S1: {
      const Eigen::MatrixXd hs = m.block_hs_norms();
      return hs.colwise().sum().maxCoeff();
    }
    case NormKind::Sinf: {
      const Eigen::MatrixXd hs = m.block_hs_norms();
      return hs.rowwise().sum().maxCoeff();
    }
    case NormKind::SF:
      return m.flat.norm();
    case NormKind::Smax: {
      const Eigen::MatrixXd hs = m.block_hs_norms();
      return hs.size() == 0 ? 0.0 : hs.maxCoeff();
    }
    case NormKind::L: {
      if (m.flat.size() == 0) return 0.0;
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(m.flat);
      return svd.singularValues()[0];
    }
  }
  throw std::invalid_argument("unknown norm kind");
}

Eigen::VectorXd trace_diag(const KernelMatrix& m) {
  if (!m.square())
    throw std::invalid_argument("trace_diag: kernel matrix must be square");
  Eigen::VectorXd out(m.p_rows);
  for (int i = 0; i < m.p_rows; ++i) out[i] = m.block(i, i).trace();
  return out;
}

void require_symmetric(const KernelMatrix& m, double tol, const char* where) {
  if (!m.square())
    throw std::invalid_argument(std::string(where) + ": kernel matrix must be square");
  const double asym = (m.flat - m.flat.transpose()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, m.flat.cwiseAbs().maxCoeff());
  if (asym > tol * scale)
    throw std::invalid_argument(std::string(where) + ": kernel matrix not symmetric");
}

void fix_signs(Eigen::MatrixXd& vectors) {
  for (int j = 0; j < vectors.cols(); ++j) {
    int idx = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&idx);
    if (vectors(idx, j) < 0) vectors.col(j) = -vectors.col(j);
  }
}

MercerEigen mercer_eigen(const KernelMatrix& m, int count) {
  require_symmetric(m, 1e-8, "mercer_eigen");
  const int dim = m.p_rows * m.K;
  if (count < 0 || count > dim)
    throw std::invalid_argument("mercer_eigen: count out of range");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m.flat + m.flat.transpose()));
  if (es.info() != Eigen::Success)
    throw NumericalError("mercer_eigen: eigendecomposition failed");
  MercerEigen out;
  out.values.resize(count);
  out.functions.resize(dim, count);
  for (int j = 0; j < count; ++j) {
    out.values[j] = es.eigenvalues()[dim - 1 - j];
    out.functions.col(j) = es.eigenvectors().col(dim - 1 - j);
  }
  fix_signs(out.functions);
  return out;
}

Eigen::VectorXd apply_kernel(const KernelMatrix& m, const Eigen::VectorXd& x) {
  if (x.size() != m.p_cols * m.K)
    throw std::invalid_argument("apply_kernel: dimension mismatch");
  return m.flat * x;
}

}  // namespace fcov
