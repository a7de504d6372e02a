#include "fcov/select.hpp"

#include <cmath>
#include <stdexcept>

#include "fcov/covariance.hpp"
#include "fcov/digit.hpp"
#include "fcov/fpoet.hpp"

namespace fcov {

namespace {

// Shared ratio rule: normalized eigenvalues below eps0 are zeroed, 0/0
// ratios count as 1, first minimum wins.
int ratio_argmin(const Eigen::VectorXd& eigenvalues, double normalizer,
                 double eps0, int rmax) {
  const int len = static_cast<int>(eigenvalues.size());
  if (len == 0) throw std::invalid_argument("ratio estimator: empty spectrum");
  rmax = std::min(rmax, len - 1);
  if (rmax < 1) throw std::invalid_argument("ratio estimator: spectrum too short");

  Eigen::VectorXd v = eigenvalues.cwiseMax(0.0) / normalizer;
  for (int i = 0; i < len; ++i)
    if (v[i] < eps0) v[i] = 0.0;

  int best_r = 1;
  double best = std::numeric_limits<double>::infinity();
  for (int r = 1; r <= rmax; ++r) {
    const double den = v[r - 1], num = v[r];
    const double ratio = (den == 0.0) ? 1.0 : num / den;
    if (ratio < best) {
      best = ratio;
      best_r = r;
    }
  }
  return best_r;
}

}  // namespace

std::string to_string(FitMethod m) { return m == FitMethod::Digit ? "digit" : "fpoet"; }

FitMethod parse_fit_method(const std::string& tag) {
  if (tag == "digit") return FitMethod::Digit;
  if (tag == "fpoet") return FitMethod::Fpoet;
  throw std::invalid_argument("unknown fit method: " + tag);
}

int ratio_digit(const Eigen::VectorXd& omega_eigenvalues, int p, double c_r,
                double eps0) {
  const int rmax = std::max(1, static_cast<int>(c_r * p));
  return ratio_argmin(omega_eigenvalues, static_cast<double>(p) * p, eps0, rmax);
}

int ratio_fpoet(const Eigen::VectorXd& tau_eigenvalues, int p, int r0, double eps0) {
  return ratio_argmin(tau_eigenvalues, static_cast<double>(p), eps0, std::max(r0, 1));
}

double mean_squared_residuals(const FunctionalPanel& centered, FitMethod method,
                              int r) {
  const int n = centered.n, p = centered.p;
  if (r < 0) throw std::invalid_argument("mean_squared_residuals: r must be >= 0");
  const double pn = static_cast<double>(p) * n;
  if (r == 0) return centered.coeffs.squaredNorm() / pn;

  if (method == FitMethod::Digit) {
    if (r > p) throw std::invalid_argument("mean_squared_residuals: r > p");
    const DigitFit fit = fit_digit(centered, r);
    return fit.residuals.coeffs.squaredNorm() / pn;
  }
  if (r > std::min(n, p * centered.K))
    throw std::invalid_argument("mean_squared_residuals: r out of range");
  const FpoetFit fit = ls_fit(centered, r);
  return fit.residuals.coeffs.squaredNorm() / pn;
}

std::array<double, 3> penalty_values(int p, int n) {
  const double pd = p, nd = n;
  const double ratio = (pd + nd) / (pd * nd);
  const double mn = std::min(pd, nd);
  return {ratio * std::log(pd * nd / (pd + nd)), ratio * std::log(mn),
          std::log(mn) / mn};
}

SelectionReport information_criteria(const FunctionalPanel& centered, int r_digit,
                                     int r_fpoet) {
  SelectionReport report;
  report.r_hat_digit = r_digit;
  report.r_hat_fpoet = r_fpoet;

  const double v_digit = mean_squared_residuals(centered, FitMethod::Digit, r_digit);
  const double v_fpoet = mean_squared_residuals(centered, FitMethod::Fpoet, r_fpoet);
  const auto g = penalty_values(centered.p, centered.n);

  // Residuals at round-off level count as an exact fit; the log criterion
  // is meaningless there.
  const double v_total = mean_squared_residuals(centered, FitMethod::Digit, 0);
  const double v_floor = 1e-12 * v_total;
  report.ic_defined = v_digit > v_floor && v_fpoet > v_floor;
  for (int i = 0; i < 3; ++i) {
    report.pc[0][i] = v_digit + r_digit * g[i];
    report.pc[1][i] = v_fpoet + r_fpoet * g[i];
    report.delta_pc[i] = report.pc[0][i] - report.pc[1][i];
    if (report.ic_defined) {
      report.ic[0][i] = std::log(v_digit) + r_digit * g[i];
      report.ic[1][i] = std::log(v_fpoet) + r_fpoet * g[i];
      report.delta_ic[i] = report.ic[0][i] - report.ic[1][i];
    } else {
      report.ic[0][i] = report.ic[1][i] = report.delta_ic[i] =
          std::numeric_limits<double>::quiet_NaN();
    }
  }

  int votes = 0;
  for (int i = 0; i < 3; ++i) {
    const double d = report.ic_defined ? report.delta_ic[i] : report.delta_pc[i];
    if (d < 0) ++votes;
  }
  report.chosen_model = votes >= 2 ? "ffm1" : "ffm2";
  return report;
}

SelectionReport select_model(const FunctionalPanel& centered,
                             const SelectionOptions& options) {
  const KernelMatrix cov = sample_cov(centered);
  const Eigen::MatrixXd omega = gram_omega(cov);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(omega);
  const Eigen::VectorXd omega_eigs = es.eigenvalues().reverse();
  const int r_digit = ratio_digit(omega_eigs, centered.p, options.c_r, options.eps0);

  const FpoetFit probe = ls_fit(centered, 0);
  const int r0 = options.r0 > 0 ? options.r0 : default_fpoet_range(centered.n, centered.p);
  const int r_fpoet = ratio_fpoet(probe.tau, centered.p, r0, options.eps0);

  return information_criteria(centered, r_digit, r_fpoet);
}

}  // namespace fcov
