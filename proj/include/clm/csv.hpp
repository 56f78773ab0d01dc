#pragma once

#include <string>
#include <vector>

#include "clm/types.hpp"

namespace clm {

// CSV with a header row; every column is numeric. Target columns are picked
// by name, all remaining columns become features in file order.
Dataset load_regression_csv(const std::string& path, const std::string& target);
// The target column holds integer class labels 0..K-1.
Dataset load_classification_csv(const std::string& path, const std::string& target);
Dataset load_multitask_csv(const std::string& path, const std::vector<std::string>& targets);

// Features are written as x0..x{d-1}; targets as y (regression), y with
// integer labels (classification), or t0..t{K-1} (multitask). Values
// round-trip exactly.
void save_dataset_csv(const std::string& path, const Dataset& data);

// One value per line (or comma separated); no header.
Vector load_vector(const std::string& path);
void save_vector(const std::string& path, const Vector& v);

}  // namespace clm
