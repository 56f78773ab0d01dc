#include "clm/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace clm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& s, int line_no) {
  double v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw InputError("line " + std::to_string(line_no) + ": not a number: '" + s + "'");
  return v;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  Table t;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_line(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw InputError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(t.header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    std::vector<double> row(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j) row[j] = parse_double(fields[j], line_no);
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw InputError(path + ": missing header row");
  if (t.rows.empty()) throw InputError(path + ": no data rows");
  return t;
}

std::vector<int> column_indices(const Table& t, const std::vector<std::string>& names) {
  std::vector<int> idx;
  for (const auto& name : names) {
    const auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) throw InputError("no column named '" + name + "'");
    idx.push_back(static_cast<int>(it - t.header.begin()));
  }
  return idx;
}

// features = all columns not listed as targets, in file order
void split_columns(const Table& t, const std::vector<int>& target_idx, Matrix& X, Matrix& T) {
  const int n = static_cast<int>(t.rows.size());
  const int total = static_cast<int>(t.header.size());
  const int k = static_cast<int>(target_idx.size());
  if (total - k < 1) throw InputError("no feature columns left");
  std::vector<bool> is_target(total, false);
  for (int j : target_idx) is_target[j] = true;
  X.resize(n, total - k);
  T.resize(n, k);
  for (int i = 0; i < n; ++i) {
    int c = 0;
    for (int j = 0; j < total; ++j)
      if (!is_target[j]) X(i, c++) = t.rows[i][j];
    for (int j = 0; j < k; ++j) T(i, j) = t.rows[i][target_idx[j]];
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Dataset load_regression_csv(const std::string& path, const std::string& target) {
  const Table t = read_table(path);
  Matrix X, T;
  split_columns(t, column_indices(t, {target}), X, T);
  return Dataset::regression(std::move(X), Vector(T.col(0)));
}

Dataset load_classification_csv(const std::string& path, const std::string& target) {
  const Table t = read_table(path);
  Matrix X, T;
  split_columns(t, column_indices(t, {target}), X, T);
  std::vector<int> labels(T.rows());
  int num_classes = 0;
  for (int i = 0; i < T.rows(); ++i) {
    const double v = T(i, 0);
    if (v != std::floor(v) || v < 0) throw InputError("class labels must be integers >= 0");
    labels[i] = static_cast<int>(v);
    num_classes = std::max(num_classes, labels[i] + 1);
  }
  return Dataset::classification_from_labels(std::move(X), labels, num_classes);
}

Dataset load_multitask_csv(const std::string& path, const std::vector<std::string>& targets) {
  if (targets.empty()) throw InputError("need at least one target column");
  const Table t = read_table(path);
  Matrix X, T;
  split_columns(t, column_indices(t, targets), X, T);
  return Dataset::multitask(std::move(X), std::move(T));
}

void save_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  for (int j = 0; j < data.d(); ++j) out << "x" << j << ",";
  if (data.task == TaskKind::Multitask) {
    for (int k = 0; k < data.Y.cols(); ++k) out << "t" << k << (k + 1 < data.Y.cols() ? "," : "");
  } else {
    out << "y";
  }
  out << "\n";
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.d(); ++j) out << fmt(data.X(i, j)) << ",";
    switch (data.task) {
      case TaskKind::Regression:
        out << fmt(data.y[i]);
        break;
      case TaskKind::Classification: {
        int label = 0;
        data.Y.row(i).maxCoeff(&label);
        out << label;
        break;
      }
      case TaskKind::Multitask:
        for (int k = 0; k < data.Y.cols(); ++k)
          out << fmt(data.Y(i, k)) << (k + 1 < data.Y.cols() ? "," : "");
        break;
    }
    out << "\n";
  }
  if (!out) throw InputError("failed writing " + path);
}

Vector load_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::vector<double> vals;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    for (const auto& f : split_line(line))
      if (!f.empty()) vals.push_back(parse_double(f, line_no));
  }
  if (vals.empty()) throw InputError(path + ": no values");
  return Eigen::Map<Vector>(vals.data(), static_cast<int>(vals.size()));
}

void save_vector(const std::string& path, const Vector& v) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  for (int i = 0; i < v.size(); ++i) out << fmt(v[i]) << "\n";
  if (!out) throw InputError("failed writing " + path);
}

}  // namespace clm
