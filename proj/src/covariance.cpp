#include "fcov/covariance.hpp"

#include <stdexcept>

namespace fcov {

FunctionalPanel center(const FunctionalPanel& panel) {
  if (panel.n < 2) throw std::invalid_argument("center: need at least 2 observations");
  FunctionalPanel out = panel;
  const Eigen::RowVectorXd mean = panel.coeffs.colwise().mean();
  out.coeffs.rowwise() -= mean;
  return out;
}

KernelMatrix sample_cov(const FunctionalPanel& panel) {
  KernelMatrix out(panel.p, panel.p, panel.K);
  out.flat = panel.coeffs.transpose() * panel.coeffs / static_cast<double>(panel.n);
  out.flat = 0.5 * (out.flat + out.flat.transpose()).eval();
  return out;
}

}  // namespace fcov
