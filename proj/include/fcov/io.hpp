#pragma once

#include <filesystem>
#include <nlohmann/json_fwd.hpp>
#include <string>

#include "fcov/basis.hpp"
#include "fcov/kernel.hpp"
#include "fcov/select.hpp"
#include "fcov/sim.hpp"

namespace fcov {

inline constexpr int kSchemaVersion = 1;

// Long-format curve panel CSV: header "t,series,u,value", t and series
// 0-based, u matching the basis grid.
void write_panel_csv(const std::filesystem::path& path, const GridPanel& panel,
                     const Eigen::VectorXd& grid);

struct PanelCsv {
  GridPanel panel;
  Eigen::VectorXd grid;
};

PanelCsv read_panel_csv(const std::filesystem::path& path);

// Kernel matrix as a flattened (p*K) x (p*K) CSV plus a JSON header
// {schema_version, p_rows, p_cols, K, basis?}.
void write_kernel(const std::filesystem::path& csv_path,
                  const std::filesystem::path& json_path, const KernelMatrix& m,
                  const BasisSpec* basis = nullptr);

KernelMatrix read_kernel(const std::filesystem::path& csv_path,
                         const std::filesystem::path& json_path);

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

// Basis spec as JSON {kind, K, grid}; quadrature weights are rebuilt.
void write_basis_json(const std::filesystem::path& path, const BasisSpec& spec);
BasisSpec read_basis_json(const std::filesystem::path& path);

nlohmann::json selection_report_to_json(const SelectionReport& report);

// Unknown keys are rejected.
DgpConfig dgp_config_from_json(const nlohmann::json& j);
nlohmann::json dgp_config_to_json(const DgpConfig& config);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace fcov
