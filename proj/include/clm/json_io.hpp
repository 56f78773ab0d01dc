#pragma once

#include <json.hpp>

#include "clm/cg.hpp"
#include "clm/experiments.hpp"
#include "clm/pgd.hpp"
#include "clm/solver_report.hpp"
#include "clm/theory.hpp"
#include "clm/types.hpp"

// JSON views of the library types. nlohmann::json keeps object keys sorted
// and prints shortest-round-trip doubles, so equal values give equal bytes;
// wall-clock fields are therefore opt-in.

namespace clm {

using Json = nlohmann::json;

inline Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Json matrix_json(const Matrix& M) {
  Json rows = Json::array();
  for (int i = 0; i < M.rows(); ++i) {
    Json r = Json::array();
    for (int j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline Json partition_json(const Partition& p) {
  Json groups = Json::array();
  for (const auto& g : p.groups()) groups.push_back(g);
  return Json{{"items", p.item_count()}, {"groups", std::move(groups)}};
}

inline Json report_json(const SolverReport& r, bool timings = false) {
  Json j{{"iterations", r.iterations},
         {"converged", r.converged},
         {"status", r.status},
         {"objective_trace", r.objective_trace}};
  if (!r.step_sizes.empty()) j["step_sizes"] = r.step_sizes;
  if (!r.fw_gaps.empty()) j["gaps"] = r.fw_gaps;
  if (timings) j["wall_time_sec"] = r.wall_time_sec;
  return j;
}

inline Json feature_model_json(const ClusteredLinearModel& m) {
  return Json{{"kind", "feature-clustered"},
              {"groups", partition_json(m.groups)},
              {"values", matrix_json(m.values)},
              {"intercept", m.intercept},
              {"weights", matrix_json(m.weights())}};
}

inline Json sample_model_json(const SampleClusteredModel& m) {
  return Json{{"kind", "sample-clustered"},
              {"groups", partition_json(m.groups)},
              {"num_targets", m.num_targets},
              {"experts", matrix_json(m.experts)}};
}

inline Json sparse_model_json(const SparseClusteredModel& m) {
  return Json{{"kind", "sparse-clustered"},
              {"weights", vector_json(m.w)},
              {"support", m.support},
              {"support_groups", m.support_groups},
              {"barycenters", m.barycenters}};
}

inline Json pgd_result_json(const PGDResult& r, bool timings = false) {
  Json j{{"solver", "pgd"},
         {"groups", partition_json(r.partition)},
         {"values", matrix_json(r.values)},
         {"intercept", r.intercept},
         {"weights", matrix_json(r.W)},
         {"report", report_json(r.report, timings)}};
  if (r.sparse) j["sparse"] = sparse_model_json(*r.sparse);
  if (r.W_tilde.size() > 0) j["anchors"] = matrix_json(r.W_tilde);
  return j;
}

inline Json cg_result_json(const CGResult& r, bool timings = false) {
  Json j{{"solver", "cg"},
         {"groups", partition_json(r.partition)},
         {"report", report_json(r.report, timings)},
         {"oracle_warning", r.oracle_warning}};
  if (!r.oracle_psi.empty()) j["oracle_psi"] = r.oracle_psi;
  if (r.feature_model) j["model"] = feature_model_json(*r.feature_model);
  if (r.sample_model) j["model"] = sample_model_json(*r.sample_model);
  return j;
}

inline Json cell_json(const CellStat& c) {
  return Json{{"mean", c.mean},
              {"stddev", c.stddev},
              {"failures", c.failures},
              {"values", c.values}};
}

inline Json table_json(const TableResult& t) {
  Json cells = Json::array();
  for (const auto& row : t.cells) {
    Json r = Json::array();
    for (const auto& cell : row) r.push_back(cell_json(cell));
    cells.push_back(std::move(r));
  }
  return Json{{"name", t.name},
              {"methods", t.methods},
              {"columns", t.columns},
              {"cells", std::move(cells)}};
}

inline Json contraction_json(const ContractionReport& r) {
  return Json{{"rho", r.rho},         {"nu", r.nu},       {"exact", r.exact},
              {"subspaces", r.subspaces}, {"pairs", r.pairs}, {"triples", r.triples}};
}

inline Json convergence_json(const ConvergenceCheck& c) {
  return Json{{"constants", contraction_json(c.constants)},
              {"errors", c.errors},
              {"bounds", c.bounds},
              {"noise_norm", c.noise_norm},
              {"bound_holds", c.bound_holds}};
}

inline Json stirling_json(const StirlingBounds& s) {
  return Json{{"value", s.value},
              {"lower_simple", s.lower_simple},
              {"lower_refined", s.lower_refined},
              {"upper", s.upper},
              {"simple_holds", s.simple_holds}};
}

inline Json projection_json(const SparseClusteredModel& m, double distance2) {
  Json j = sparse_model_json(m);
  j["distance2"] = distance2;
  return j;
}

inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace clm
