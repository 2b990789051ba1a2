#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "wimf/spectral.hpp"

namespace wimf {

// Shortest decimal string that parses back to the same double.
std::string format_double(double x);
double parse_double(const std::string& s);

void write_matrix_csv(const std::filesystem::path& path, const MatrixXd& M);
MatrixXd read_matrix_csv(const std::filesystem::path& path);

// Flat `key = value` file; keys are written in sorted order.
using KeyValues = std::map<std::string, std::string>;

void write_key_values(const std::filesystem::path& path, const KeyValues& kv);
KeyValues read_key_values(const std::filesystem::path& path);

std::string join_doubles(const VectorXd& v, char sep = ',');
VectorXd split_doubles(const std::string& s, char sep = ',');

}  // namespace wimf
