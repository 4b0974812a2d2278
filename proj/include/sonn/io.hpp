#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sonn/diagnostics.hpp"
#include "sonn/solver.hpp"

namespace sonn {

using Json = nlohmann::ordered_json;

// Complex numbers serialize as [re, im].
Json to_json(cd z);
cd complex_from_json(const Json& j);
Json to_json(const Mat& M);

Json to_json(const HiggsTuple& q);
HiggsTuple higgs_from_json(const Json& j, int n);
Json to_json(const BundleSpec& spec);
Json to_json(const SolverConfig& c);
void apply_json(const Json& j, SolverConfig& c);
Json to_json(const ResidualReport& r, bool withTrace = true);
Json to_json(const DominationReport& r);
Json to_json(const StructuralReport& r);
Json to_json(const EnergyReport& r);
Json to_json(const VkReport& r);
Json to_json(const ExhaustionReport& r);
Json to_json(const SimpsonReport& r);
Json to_json(const AlgebraSuiteReport& r);
Json to_json(const SkewSuiteReport& r);
Json to_json(const PerturbationSuiteReport& r);

// "c0,c1,..." polynomial coefficients; each entry "re" or "re:im".
std::vector<cd> parse_coefficients(const std::string& s);
// "48x96" -> (48, 96)
std::pair<int, int> parse_grid(const std::string& s);

struct NamedColumn {
  std::string name;
  Eigen::VectorXd values;
};

// Columns node_index, r, phi, then the named values, full double precision.
void write_field_csv(const std::filesystem::path& path, const DiskGrid& grid, const std::vector<NamedColumn>& cols);
// Metric entries as h_a_b_re / h_a_b_im columns.
void write_metric_csv(const std::filesystem::path& path, const DiskGrid& grid, const MatrixField& H);
MatrixField read_metric_csv(const std::filesystem::path& path, const DiskGrid& grid, int dim);

void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

// Polar heatmap of a nodal scalar field.
void write_polar_svg(const std::filesystem::path& path, const DiskGrid& grid, const Eigen::VectorXd& values,
                     const std::string& title);

}  // namespace sonn
