#include "fcov/io.hpp"

#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "fcov/errors.hpp"

namespace fcov {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.precision(17);
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  return in;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("malformed CSV ") + what + ": '" + s + "'");
  }
}

long parse_long(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("malformed CSV ") + what + ": '" + s + "'");
  }
}

}  // namespace

void write_panel_csv(const std::filesystem::path& path, const GridPanel& panel,
                     const Eigen::VectorXd& grid) {
  if (grid.size() != panel.grid_size())
    throw std::invalid_argument("write_panel_csv: grid size mismatch");
  auto out = open_out(path);
  out << "t,series,u,value\n";
  for (int t = 0; t < panel.n; ++t)
    for (int i = 0; i < panel.p; ++i)
      for (int g = 0; g < grid.size(); ++g)
        out << t << ',' << i << ',' << grid[g] << ',' << panel.at(t, i, g) << '\n';
}

PanelCsv read_panel_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("panel CSV: empty file");
  {
    auto header = split_csv_line(line);
    if (header.size() != 4 || header[0] != "t" || header[1] != "series" ||
        header[2] != "u" || header[3] != "value")
      throw std::invalid_argument("panel CSV: expected header t,series,u,value");
  }

  struct Row {
    long t, series;
    double u, value;
  };
  std::vector<Row> rows;
  std::set<double> grid_set;
  long max_t = -1, max_series = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw std::invalid_argument("panel CSV: expected 4 fields per row");
    Row r{parse_long(f[0], "t"), parse_long(f[1], "series"),
          parse_double(f[2], "u"), parse_double(f[3], "value")};
    if (r.t < 0 || r.series < 0)
      throw std::invalid_argument("panel CSV: negative index");
    max_t = std::max(max_t, r.t);
    max_series = std::max(max_series, r.series);
    grid_set.insert(r.u);
    rows.push_back(r);
  }
  if (rows.empty()) throw std::invalid_argument("panel CSV: no data rows");

  PanelCsv out;
  out.grid.resize(static_cast<int>(grid_set.size()));
  std::map<double, int> grid_index;
  {
    int g = 0;
    for (double u : grid_set) {
      out.grid[g] = u;
      grid_index[u] = g;
      ++g;
    }
  }
  out.panel.n = static_cast<int>(max_t + 1);
  out.panel.p = static_cast<int>(max_series + 1);
  out.panel.values.setConstant(out.panel.n * out.panel.p, out.grid.size(),
                               std::numeric_limits<double>::quiet_NaN());
  for (const Row& r : rows)
    out.panel.values(r.t * out.panel.p + r.series, grid_index[r.u]) = r.value;
  if (out.panel.values.hasNaN())
    throw std::invalid_argument("panel CSV: missing (t, series, u) combinations");
  return out;
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  auto out = open_out(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    std::vector<double> row;
    row.reserve(f.size());
    for (const auto& s : f) row.push_back(parse_double(s, "entry"));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument("matrix CSV: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("matrix CSV: empty");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_kernel(const std::filesystem::path& csv_path,
                  const std::filesystem::path& json_path, const KernelMatrix& m,
                  const BasisSpec* basis) {
  write_matrix_csv(csv_path, m.flat);
  json header{{"schema_version", kSchemaVersion},
              {"p_rows", m.p_rows},
              {"p_cols", m.p_cols},
              {"K", m.K}};
  if (basis) {
    header["basis"] = {{"kind", to_string(basis->kind)},
                       {"K", basis->K},
                       {"grid", std::vector<double>(basis->grid.begin(), basis->grid.end())}};
  }
  write_json(json_path, header);
}

KernelMatrix read_kernel(const std::filesystem::path& csv_path,
                         const std::filesystem::path& json_path) {
  const json header = read_json(json_path);
  KernelMatrix m;
  m.p_rows = header.at("p_rows").get<int>();
  m.p_cols = header.at("p_cols").get<int>();
  m.K = header.at("K").get<int>();
  m.flat = read_matrix_csv(csv_path);
  if (m.flat.rows() != m.p_rows * m.K || m.flat.cols() != m.p_cols * m.K)
    throw std::invalid_argument("kernel CSV does not match its JSON header");
  return m;
}

void write_basis_json(const std::filesystem::path& path, const BasisSpec& spec) {
  json j{{"kind", to_string(spec.kind)},
         {"K", spec.K},
         {"grid", std::vector<double>(spec.grid.begin(), spec.grid.end())}};
  write_json(path, j);
}

BasisSpec read_basis_json(const std::filesystem::path& path) {
  const json j = read_json(path);
  const auto kind = parse_basis_kind(j.at("kind").get<std::string>());
  const int K = j.at("K").get<int>();
  const auto grid_vec = j.at("grid").get<std::vector<double>>();
  Eigen::VectorXd grid =
      Eigen::Map<const Eigen::VectorXd>(grid_vec.data(), grid_vec.size());
  return make_basis(kind, K, std::move(grid));
}

nlohmann::json selection_report_to_json(const SelectionReport& report) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["r_hat_digit"] = report.r_hat_digit;
  j["r_hat_fpoet"] = report.r_hat_fpoet;
  j["pc"] = {{"digit", report.pc[0]}, {"fpoet", report.pc[1]}};
  if (report.ic_defined) {
    j["ic"] = {{"digit", report.ic[0]}, {"fpoet", report.ic[1]}};
    j["delta_ic"] = report.delta_ic;
  } else {
    j["warning"] = "zero mean squared residuals; IC undefined, decision from PC";
  }
  j["delta_pc"] = report.delta_pc;
  j["chosen_model"] = report.chosen_model;
  return j;
}

DgpConfig dgp_config_from_json(const nlohmann::json& j) {
  DgpConfig cfg;
  const std::set<std::string> allowed{
      "dgp",     "p",          "n",           "r",
      "alpha",   "seed",       "burn_in",     "n_factor_basis",
      "n_eps_basis", "k_est",  "idio_scale"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key))
      throw std::invalid_argument("DgpConfig: unknown key '" + key + "'");
  }
  cfg.dgp = j.value("dgp", cfg.dgp);
  cfg.p = j.value("p", cfg.p);
  cfg.n = j.value("n", cfg.n);
  cfg.r = j.value("r", cfg.r);
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.burn_in = j.value("burn_in", cfg.burn_in);
  cfg.n_factor_basis = j.value("n_factor_basis", cfg.n_factor_basis);
  cfg.n_eps_basis = j.value("n_eps_basis", cfg.n_eps_basis);
  cfg.k_est = j.value("k_est", cfg.k_est);
  cfg.idio_scale = j.value("idio_scale", cfg.idio_scale);
  return cfg;
}

nlohmann::json dgp_config_to_json(const DgpConfig& cfg) {
  return json{{"dgp", cfg.dgp},
              {"p", cfg.p},
              {"n", cfg.n},
              {"r", cfg.r},
              {"alpha", cfg.alpha},
              {"seed", cfg.seed},
              {"burn_in", cfg.burn_in},
              {"n_factor_basis", cfg.n_factor_basis},
              {"n_eps_basis", cfg.n_eps_basis},
              {"k_est", cfg.k_est},
              {"idio_scale", cfg.idio_scale}};
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("JSON parse error in " + path.string() + ": " + e.what());
  }
  return j;
}

}  // namespace fcov
