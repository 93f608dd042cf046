#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include "json.hpp"

namespace kinetostat {

/// Shortest round-trippable text for CSV/report output (17 significant digits).
std::string fmt_num(double v);

std::string csv_row(const std::vector<double>& values);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);  // row-major nested arrays
nlohmann::json vector_to_json(const Eigen::VectorXd& v);

}  // namespace kinetostat
