// Command line front end: simulation, estimation, model selection,
// inversion, portfolio backtesting, and the Monte Carlo benchmark runner.
#include <CLI11.hpp>
#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <numeric>

#include "fcov/aft.hpp"
#include "fcov/basis.hpp"
#include "fcov/covariance.hpp"
#include "fcov/digit.hpp"
#include "fcov/errors.hpp"
#include "fcov/fpoet.hpp"
#include "fcov/inverse.hpp"
#include "fcov/io.hpp"
#include "fcov/parallel.hpp"
#include "fcov/portfolio.hpp"
#include "fcov/select.hpp"
#include "fcov/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fcov;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return {v.begin(), v.end()};
}

struct PanelInput {
  FunctionalPanel panel;
  BasisSpec basis;
  double projection_error{0.0};
};

PanelInput load_panel(const fs::path& panel_path, const fs::path& basis_path) {
  PanelInput out{};
  out.basis = read_basis_json(basis_path);
  const PanelCsv csv = read_panel_csv(panel_path);
  if (csv.grid.size() != out.basis.grid_size() ||
      (csv.grid - out.basis.grid).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("panel grid does not match the basis grid");
  const ProjectionResult proj = project(csv.panel, out.basis);
  out.panel = proj.panel;
  out.projection_error = proj.max_relative_error;
  return out;
}

ThresholdRule rule_from(const std::string& family, double cdot, double scad_a,
                        double alasso_eta) {
  ThresholdRule rule;
  rule.family = parse_threshold_family(family);
  rule.c_dot = cdot;
  rule.scad_a = scad_a;
  rule.alasso_eta = alasso_eta;
  return rule;
}

int resolve_rank(const FunctionalPanel& centered, FitMethod method, int requested) {
  if (requested > 0) return requested;
  const KernelMatrix cov = sample_cov(centered);
  if (method == FitMethod::Digit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_omega(cov));
    return ratio_digit(es.eigenvalues().reverse(), centered.p);
  }
  const FpoetFit probe = ls_fit(centered, 0);
  return ratio_fpoet(probe.tau, centered.p,
                     default_fpoet_range(centered.n, centered.p));
}

// ---------------------------------------------------------------------------
// simulate

int run_simulate(const fs::path& config_path, const fs::path& out_dir,
                 int grid_points) {
  const DgpConfig cfg = dgp_config_from_json(read_json(config_path));
  const SimOutput sim = generate(cfg);
  const BasisSpec basis = make_basis(BasisKind::Fourier, cfg.k_est,
                                     std::max(grid_points, 2 * cfg.k_est + 1));

  fs::create_directories(out_dir);
  write_basis_json(out_dir / "basis.json", basis);
  write_panel_csv(out_dir / "panel.csv", evaluate(sim.panel, basis), basis.grid);
  write_kernel(out_dir / "truth_sigma_y.csv", out_dir / "truth_sigma_y.json",
               sim.truth.sigma_y, &basis);
  write_kernel(out_dir / "truth_sigma_eps.csv", out_dir / "truth_sigma_eps.json",
               sim.truth.sigma_eps, &basis);

  json meta{{"schema_version", kSchemaVersion},
            {"config", dgp_config_to_json(cfg)},
            {"s_p_true", sim.truth.s_p_true},
            {"truncation_remainder", sim.truth.truncation_remainder}};
  write_json(out_dir / "truth_meta.json", meta);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fit

struct FitOptions {
  std::string method{"digit"};
  int r{0};
  std::string threshold{"soft"};
  double cdot{0.5};
  double scad_a{3.7};
  double alasso_eta{1.0};
  int cv_folds{0};
  std::vector<double> cv_grid{0.25, 0.5, 1.0, 2.0};
  bool threshold_diagonal{false};
};

int run_fit(const fs::path& panel_path, const fs::path& basis_path,
            const FitOptions& opt, const fs::path& truth_csv,
            const fs::path& truth_json, const fs::path& out_dir) {
  const PanelInput input = load_panel(panel_path, basis_path);
  const FunctionalPanel centered = center(input.panel);
  const FitMethod method = parse_fit_method(opt.method);
  const int r = resolve_rank(centered, method, opt.r);

  ThresholdRule rule = rule_from(opt.threshold, opt.cdot, opt.scad_a, opt.alasso_eta);

  json fit_json{{"schema_version", kSchemaVersion},
                {"method", opt.method},
                {"r", r},
                {"threshold", opt.threshold},
                {"threshold_diagonal", opt.threshold_diagonal},
                {"n", centered.n},
                {"p", centered.p},
                {"K", centered.K},
                {"projection_error", input.projection_error}};

  fs::create_directories(out_dir);
  KernelMatrix sigma_y;
  if (method == FitMethod::Digit) {
    if (opt.cv_folds > 1) {
      const DigitFit pre = fit_digit(centered, r);
      rule.c_dot = cv_select_cdot(pre.residuals, rule, opt.cv_folds, opt.cv_grid);
    }
    const DigitResult res = digit_estimator(centered, r, rule, opt.threshold_diagonal);
    sigma_y = res.sigma_y;
    fit_json["omega_eigenvalues"] = to_vector(res.fit.omega_eigenvalues);
    write_matrix_csv(out_dir / "loadings.csv", res.fit.loadings);
  } else {
    if (opt.cv_folds > 1) {
      const FpoetFit pre = ls_fit(centered, r);
      rule.c_dot = cv_select_cdot(pre.residuals, rule, opt.cv_folds, opt.cv_grid);
    }
    const FpoetResult res = fpoet_estimator(centered, r, rule, opt.threshold_diagonal);
    sigma_y = res.sigma_y;
    fit_json["tau"] = to_vector(res.fit.tau);
    write_matrix_csv(out_dir / "gamma.csv", res.fit.gamma);
  }
  fit_json["cdot"] = rule.c_dot;
  fit_json["lambda"] = threshold_level(rule, centered.n, centered.p);

  write_kernel(out_dir / "sigma_y_hat.csv", out_dir / "sigma_y_hat.json", sigma_y,
               &input.basis);
  write_json(out_dir / "fit.json", fit_json);

  if (!truth_csv.empty()) {
    const KernelMatrix truth = read_kernel(truth_csv, truth_json);
    const KernelMatrix sample = sample_cov(centered);
    json losses{{"schema_version", kSchemaVersion}};
    const std::pair<const char*, NormKind> kinds[] = {
        {"Smax", NormKind::Smax}, {"SF", NormKind::SF}, {"S1", NormKind::S1}};
    for (const auto& [tag, kind] : kinds) {
      losses["estimator"][tag] = loss(sigma_y, truth, kind);
      losses["sample"][tag] = loss(sample, truth, kind);
    }
    write_json(out_dir / "loss_report.json", losses);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// select

int run_select(const fs::path& panel_path, const fs::path& basis_path,
               const SelectionOptions& options, const fs::path& out_path) {
  const PanelInput input = load_panel(panel_path, basis_path);
  const SelectionReport report = select_model(center(input.panel), options);
  write_json(out_path, selection_report_to_json(report));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// invert

struct InvertOptions {
  std::string mode{"truncated"};
  double energy{0.95};
  double ridge{-1.0};  // <0: trace-scaled default
  double kappa{0.0};   // >0: also emit the correlation pair
  int r{0};
  std::string threshold{"soft"};
  double cdot{0.5};
};

int run_invert(const fs::path& matrix_csv, const fs::path& matrix_json,
               const fs::path& panel_path, const fs::path& basis_path,
               const InvertOptions& opt, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const InverseMode mode = parse_inverse_mode(opt.mode);
  json report{{"schema_version", kSchemaVersion}, {"mode", opt.mode}};

  KernelMatrix source;
  if (mode == InverseMode::Truncated) {
    if (matrix_csv.empty())
      throw std::invalid_argument("invert --mode truncated needs --matrix/--header");
    source = read_kernel(matrix_csv, matrix_json);
    InverseSpec spec;
    spec.energy = opt.energy;
    const KernelMatrix inv = truncated_inverse(source, spec);
    report["energy"] = opt.energy;
    report["d_n"] = spec.d_n;
    write_kernel(out_dir / "inverse.csv", out_dir / "inverse.json", inv, nullptr);
  } else {
    if (panel_path.empty())
      throw std::invalid_argument("invert --mode smw needs --panel and --basis");
    const PanelInput input = load_panel(panel_path, basis_path);
    const FunctionalPanel centered = center(input.panel);
    const int r = resolve_rank(centered, FitMethod::Digit, opt.r);
    const DigitFit fit = fit_digit(centered, r);
    const KernelMatrix sigma_eps = sample_cov(fit.residuals);
    const VarianceFactors vf = variance_factors(fit.residuals, sigma_eps);
    const ThresholdRule rule = rule_from(opt.threshold, opt.cdot, 3.7, 1.0);
    const KernelMatrix sigma_eps_aft =
        apply_aft(sigma_eps, vf, rule, centered.n, centered.p);
    const double ridge = opt.ridge >= 0.0 ? opt.ridge : default_ridge(sigma_eps_aft);
    const KernelMatrix inv = smw_inverse(fit, sigma_eps_aft, ridge);
    source = common_covariance(fit) + sigma_eps_aft;
    report["r"] = r;
    report["ridge"] = ridge;
    write_kernel(out_dir / "inverse.csv", out_dir / "inverse.json", inv, nullptr);
  }

  if (opt.kappa > 0.0) {
    const CorrelationPair pair = correlation_pair(source, opt.kappa);
    report["kappa"] = opt.kappa;
    write_kernel(out_dir / "correlation.csv", out_dir / "correlation.json",
                 pair.c_hat, nullptr);
    write_kernel(out_dir / "theta.csv", out_dir / "theta.json", pair.theta_hat,
                 nullptr);
  }
  write_json(out_dir / "invert_report.json", report);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// portfolio

struct PortfolioOptions {
  std::string method{"digit"};
  int r{0};
  int train_days{126};
  int eval_days{21};
  double energy{0.95};
  std::string threshold{"soft"};
  double cdot{0.5};
  bool already_returns{false};
};

int run_portfolio(const fs::path& prices_path, const fs::path& basis_path,
                  const PortfolioOptions& opt, const fs::path& out_dir) {
  const BasisSpec basis = read_basis_json(basis_path);
  const PanelCsv csv = read_panel_csv(prices_path);
  if (csv.grid.size() != basis.grid_size() ||
      (csv.grid - basis.grid).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("price grid does not match the basis grid");

  const GridPanel curves = opt.already_returns ? csv.panel : cidr(csv.panel);
  const FunctionalPanel panel = project(curves, basis).panel;

  const ThresholdRule rule = rule_from(opt.threshold, opt.cdot, 3.7, 1.0);
  InverseSpec spec;
  spec.energy = opt.energy;
  const auto windows =
      backtest_min_variance(panel, basis, parse_fit_method(opt.method), rule,
                            spec, opt.train_days, opt.eval_days, opt.r);
  if (windows.empty())
    throw std::invalid_argument("portfolio: not enough days for one window");

  // Weights of the last training window are the live allocation.
  FunctionalPanel train(opt.train_days, panel.p, panel.K);
  train.coeffs = panel.coeffs.middleRows(windows.back().start, opt.train_days);
  const FunctionalPanel centered = center(train);
  const int r = windows.back().r;
  KernelMatrix sigma;
  if (parse_fit_method(opt.method) == FitMethod::Digit)
    sigma = digit_estimator(centered, r, rule).sigma_y;
  else
    sigma = fpoet_estimator(centered, r, rule).sigma_y;
  InverseSpec live = spec;
  const PortfolioWeights weights = min_variance_weights(sigma, basis, live);

  fs::create_directories(out_dir);
  write_matrix_csv(out_dir / "weights.csv", weights.w);

  json report{{"schema_version", kSchemaVersion},
              {"method", opt.method},
              {"train_days", opt.train_days},
              {"eval_days", opt.eval_days},
              {"energy", opt.energy},
              {"constraint_residual", weights.constraint_residual},
              {"pre_normalization_residual", weights.pre_normalization_residual}};
  double mean_actual = 0.0;
  json rows = json::array();
  for (const auto& w : windows) {
    rows.push_back({{"start", w.start},
                    {"r", w.r},
                    {"d_n", w.d_n},
                    {"perceived", w.perceived},
                    {"actual", w.actual}});
    mean_actual += w.actual;
  }
  report["windows"] = rows;
  report["mean_actual_risk"] = mean_actual / windows.size();
  write_json(out_dir / "risk_report.json", report);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bench

struct BenchOptions {
  bool table1{false};
  bool model_selection{false};
  bool loss_curves{false};
  int p{100};
  int n{100};
  int r{3};
  double alpha{0.5};
  int reps{100};
  int k_est{15};
  std::uint64_t seed{1};
  int threads{0};
};

DgpConfig bench_config(const BenchOptions& opt, int dgp, std::uint64_t rep) {
  DgpConfig cfg;
  cfg.dgp = dgp;
  cfg.p = opt.p;
  cfg.n = opt.n;
  cfg.r = opt.r;
  cfg.alpha = opt.alpha;
  cfg.k_est = opt.k_est;
  cfg.seed = opt.seed + 1000003ULL * rep + 7919ULL * dgp;
  return cfg;
}

int run_bench(const BenchOptions& opt, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  json summary{{"schema_version", kSchemaVersion},
               {"p", opt.p},
               {"n", opt.n},
               {"r", opt.r},
               {"alpha", opt.alpha},
               {"reps", opt.reps},
               {"k_est", opt.k_est},
               {"seed", opt.seed}};

  if (opt.table1) {
    std::vector<int> hit_digit(opt.reps, 0), hit_fpoet(opt.reps, 0);
    parallel_for(opt.reps, [&](int rep) {
      {
        const SimOutput sim = generate(bench_config(opt, 1, rep));
        const FunctionalPanel centered = center(sim.panel);
        const KernelMatrix cov = sample_cov(centered);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_omega(cov));
        hit_digit[rep] = ratio_digit(es.eigenvalues().reverse(), opt.p) == opt.r;
      }
      {
        const SimOutput sim = generate(bench_config(opt, 2, rep));
        const FunctionalPanel centered = center(sim.panel);
        const FpoetFit probe = ls_fit(centered, 0);
        hit_fpoet[rep] =
            ratio_fpoet(probe.tau, opt.p, default_fpoet_range(opt.n, opt.p)) ==
            opt.r;
      }
    }, opt.threads);
    const double f_digit =
        std::accumulate(hit_digit.begin(), hit_digit.end(), 0) / double(opt.reps);
    const double f_fpoet =
        std::accumulate(hit_fpoet.begin(), hit_fpoet.end(), 0) / double(opt.reps);
    summary["table1"] = {{"frequency_digit", f_digit}, {"frequency_fpoet", f_fpoet}};
    std::ofstream csv(out_dir / "table1.csv");
    csv << "dgp,method,alpha,p,n,r,reps,frequency\n";
    csv.precision(17);
    csv << "1,digit," << opt.alpha << ',' << opt.p << ',' << opt.n << ',' << opt.r
        << ',' << opt.reps << ',' << f_digit << '\n';
    csv << "2,fpoet," << opt.alpha << ',' << opt.p << ',' << opt.n << ',' << opt.r
        << ',' << opt.reps << ',' << f_fpoet << '\n';
  }

  if (opt.model_selection) {
    std::vector<std::array<double, 6>> deltas(2 * opt.reps);
    std::vector<int> agree(2 * opt.reps, 0);
    parallel_for(2 * opt.reps, [&](int idx) {
      const int dgp = idx < opt.reps ? 1 : 2;
      const int rep = idx % opt.reps;
      const SimOutput sim = generate(bench_config(opt, dgp, rep));
      const SelectionReport report = select_model(center(sim.panel));
      for (int i = 0; i < 3; ++i) {
        deltas[idx][i] = report.delta_pc[i];
        deltas[idx][3 + i] = report.delta_ic[i];
      }
      agree[idx] = dgp == 1 ? report.delta_ic[0] < 0 : report.delta_ic[0] > 0;
    }, opt.threads);

    std::ofstream csv(out_dir / "model_selection.csv");
    csv << "dgp,rep,dpc1,dpc2,dpc3,dic1,dic2,dic3\n";
    csv.precision(17);
    for (int idx = 0; idx < 2 * opt.reps; ++idx) {
      csv << (idx < opt.reps ? 1 : 2) << ',' << idx % opt.reps;
      for (double d : deltas[idx]) csv << ',' << d;
      csv << '\n';
    }
    const double acc1 =
        std::accumulate(agree.begin(), agree.begin() + opt.reps, 0) /
        double(opt.reps);
    const double acc2 =
        std::accumulate(agree.begin() + opt.reps, agree.end(), 0) / double(opt.reps);
    summary["model_selection"] = {{"dgp1_dic1_negative", acc1},
                                  {"dgp2_dic1_positive", acc2}};
  }

  if (opt.loss_curves) {
    struct Row {
      int dgp{0}, rep{0};
      double digit[3]{}, fpoet[3]{}, sample[3]{};
    };
    std::vector<Row> rows(2 * opt.reps);
    parallel_for(2 * opt.reps, [&](int idx) {
      const int dgp = idx < opt.reps ? 1 : 2;
      const int rep = idx % opt.reps;
      const SimOutput sim = generate(bench_config(opt, dgp, rep));
      const FunctionalPanel centered = center(sim.panel);
      const KernelMatrix sample = sample_cov(centered);
      ThresholdRule rule;
      const int r_digit = resolve_rank(centered, FitMethod::Digit, 0);
      const int r_fpoet = resolve_rank(centered, FitMethod::Fpoet, 0);
      const KernelMatrix digit = digit_estimator(centered, r_digit, rule).sigma_y;
      const KernelMatrix fpoet = fpoet_estimator(centered, r_fpoet, rule).sigma_y;
      Row row;
      row.dgp = dgp;
      row.rep = rep;
      const NormKind kinds[3] = {NormKind::Smax, NormKind::SF, NormKind::S1};
      for (int k = 0; k < 3; ++k) {
        row.digit[k] = loss(digit, sim.truth.sigma_y, kinds[k]);
        row.fpoet[k] = loss(fpoet, sim.truth.sigma_y, kinds[k]);
        row.sample[k] = loss(sample, sim.truth.sigma_y, kinds[k]);
      }
      rows[idx] = row;
    }, opt.threads);

    std::ofstream csv(out_dir / "losses.csv");
    csv << "dgp,rep,estimator,Smax,SF,S1\n";
    csv.precision(17);
    int dom_digit = 0, dom_fpoet = 0;
    for (const Row& row : rows) {
      csv << row.dgp << ',' << row.rep << ",digit," << row.digit[0] << ','
          << row.digit[1] << ',' << row.digit[2] << '\n';
      csv << row.dgp << ',' << row.rep << ",fpoet," << row.fpoet[0] << ','
          << row.fpoet[1] << ',' << row.fpoet[2] << '\n';
      csv << row.dgp << ',' << row.rep << ",sample," << row.sample[0] << ','
          << row.sample[1] << ',' << row.sample[2] << '\n';
      if (row.dgp == 1 && row.digit[1] < row.sample[1]) ++dom_digit;
      if (row.dgp == 2 && row.fpoet[1] < row.sample[1]) ++dom_fpoet;
    }
    summary["loss"] = {{"digit_beats_sample_dgp1", dom_digit / double(opt.reps)},
                       {"fpoet_beats_sample_dgp2", dom_fpoet / double(opt.reps)}};
  }

  write_json(out_dir / "bench_summary.json", summary);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factor-guided covariance matrix function estimation"};
  app.require_subcommand(1);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic panel");
  std::string sim_config, sim_out{"sim_out"};
  int sim_grid_points = 101;
  sim_cmd->add_option("--config", sim_config, "DgpConfig JSON")->required();
  sim_cmd->add_option("--out-dir", sim_out, "Output directory");
  sim_cmd->add_option("--grid-points", sim_grid_points, "Export grid size");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Estimate the covariance matrix function");
  std::string fit_panel, fit_basis, fit_truth, fit_truth_header, fit_out{"fit_out"};
  FitOptions fit_opt;
  fit_cmd->add_option("--panel", fit_panel, "Panel CSV")->required();
  fit_cmd->add_option("--basis", fit_basis, "Basis JSON")->required();
  fit_cmd->add_option("--method", fit_opt.method, "digit | fpoet");
  fit_cmd->add_option("--r", fit_opt.r, "Factor count (0: eigenvalue ratio)");
  fit_cmd->add_option("--threshold", fit_opt.threshold, "hard | soft | scad | alasso");
  fit_cmd->add_option("--cdot", fit_opt.cdot, "Threshold constant");
  fit_cmd->add_option("--scad-a", fit_opt.scad_a, "SCAD a parameter");
  fit_cmd->add_option("--alasso-eta", fit_opt.alasso_eta, "Adaptive lasso eta");
  fit_cmd->add_option("--cv-folds", fit_opt.cv_folds,
                      "Cross-validate cdot with this many folds");
  fit_cmd->add_option("--cv-grid", fit_opt.cv_grid, "Candidate cdot values");
  fit_cmd->add_flag("--threshold-diagonal", fit_opt.threshold_diagonal,
                    "Threshold diagonal blocks too");
  fit_cmd->add_option("--truth", fit_truth, "True covariance CSV for loss report");
  fit_cmd->add_option("--truth-header", fit_truth_header, "True covariance JSON");
  fit_cmd->add_option("--out-dir", fit_out, "Output directory");

  // select
  auto* select_cmd = app.add_subcommand("select", "Model and factor-number selection");
  std::string select_panel, select_basis, select_out{"selection.json"};
  SelectionOptions select_opt;
  select_cmd->add_option("--panel", select_panel, "Panel CSV")->required();
  select_cmd->add_option("--basis", select_basis, "Basis JSON")->required();
  select_cmd->add_option("--c-r", select_opt.c_r, "Digit ratio search fraction");
  select_cmd->add_option("--eps0", select_opt.eps0, "Normalized eigenvalue gate");
  select_cmd->add_option("--r0", select_opt.r0, "Fpoet ratio search range");
  select_cmd->add_option("--out", select_out, "Report path");

  // invert
  auto* invert_cmd =
      app.add_subcommand("invert", "Invert a covariance matrix function");
  std::string inv_matrix, inv_header, inv_panel, inv_basis, inv_out{"invert_out"};
  InvertOptions inv_opt;
  invert_cmd->add_option("--matrix", inv_matrix, "Kernel CSV (truncated mode)");
  invert_cmd->add_option("--header", inv_header, "Kernel JSON header");
  invert_cmd->add_option("--panel", inv_panel, "Panel CSV (smw mode)");
  invert_cmd->add_option("--basis", inv_basis, "Basis JSON (smw mode)");
  invert_cmd->add_option("--mode", inv_opt.mode, "truncated | smw");
  invert_cmd->add_option("--energy", inv_opt.energy, "Retained eigenvalue fraction");
  invert_cmd->add_option("--ridge", inv_opt.ridge, "SMW ridge (-1: trace-scaled)");
  invert_cmd->add_option("--kappa", inv_opt.kappa,
                         "Also emit the Tikhonov correlation pair");
  invert_cmd->add_option("--r", inv_opt.r, "Factor count for smw (0: ratio)");
  invert_cmd->add_option("--threshold", inv_opt.threshold, "AFT family for smw");
  invert_cmd->add_option("--cdot", inv_opt.cdot, "AFT constant for smw");
  invert_cmd->add_option("--out-dir", inv_out, "Output directory");

  // portfolio
  auto* port_cmd = app.add_subcommand("portfolio", "Minimum-variance backtest");
  std::string port_prices, port_basis, port_out{"portfolio_out"};
  PortfolioOptions port_opt;
  port_cmd->add_option("--prices", port_prices, "Price CSV (t,series,u,value)")
      ->required();
  port_cmd->add_option("--basis", port_basis, "Basis JSON")->required();
  port_cmd->add_option("--method", port_opt.method, "digit | fpoet");
  port_cmd->add_option("--r", port_opt.r, "Factor count (0: ratio)");
  port_cmd->add_option("--train-days", port_opt.train_days, "Training window");
  port_cmd->add_option("--eval-days", port_opt.eval_days, "Evaluation window");
  port_cmd->add_option("--energy", port_opt.energy, "Inverse energy fraction");
  port_cmd->add_option("--threshold", port_opt.threshold, "AFT family");
  port_cmd->add_option("--cdot", port_opt.cdot, "AFT constant");
  port_cmd->add_flag("--already-returns", port_opt.already_returns,
                     "Inputs are already return curves, skip the CIDR transform");
  port_cmd->add_option("--out-dir", port_out, "Output directory");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Monte Carlo benchmark runner");
  BenchOptions bench_opt;
  std::string bench_out{"bench_out"};
  bench_cmd->add_flag("--table1", bench_opt.table1, "Factor-number frequencies");
  bench_cmd->add_flag("--model-selection", bench_opt.model_selection,
                      "Information criteria differences");
  bench_cmd->add_flag("--loss", bench_opt.loss_curves, "Covariance loss comparison");
  bench_cmd->add_option("--p", bench_opt.p, "Cross-section size");
  bench_cmd->add_option("--n", bench_opt.n, "Time length");
  bench_cmd->add_option("--r", bench_opt.r, "True factor count");
  bench_cmd->add_option("--alpha", bench_opt.alpha, "Sparsity level");
  bench_cmd->add_option("--reps", bench_opt.reps, "Replications");
  bench_cmd->add_option("--k-est", bench_opt.k_est, "Estimation basis size");
  bench_cmd->add_option("--seed", bench_opt.seed, "Base seed");
  bench_cmd->add_option("--threads", bench_opt.threads, "Worker threads (0: auto)");
  bench_cmd->add_option("--out-dir", bench_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sim_cmd->parsed()) return run_simulate(sim_config, sim_out, sim_grid_points);
    if (fit_cmd->parsed())
      return run_fit(fit_panel, fit_basis, fit_opt, fit_truth, fit_truth_header,
                     fit_out);
    if (select_cmd->parsed())
      return run_select(select_panel, select_basis, select_opt, select_out);
    if (invert_cmd->parsed())
      return run_invert(inv_matrix, inv_header, inv_panel, inv_basis, inv_opt,
                        inv_out);
    if (port_cmd->parsed())
      return run_portfolio(port_prices, port_basis, port_opt, port_out);
    if (bench_cmd->parsed()) {
      if (!bench_opt.table1 && !bench_opt.model_selection && !bench_opt.loss_curves)
        throw std::invalid_argument(
            "bench: pick at least one of --table1, --model-selection, --loss");
      return run_bench(bench_opt, bench_out);
    }
  } catch (const SingularInput& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}
