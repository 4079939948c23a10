#pragma once

// JSON views of the library types. Complex matrices embed as nested arrays of
// [re, im] pairs, spectra as plain lists. Key order is fixed so identical
// inputs always serialize to identical bytes.

#include <orthoclone/channels.hpp>
#include <orthoclone/obstruction.hpp>
#include <orthoclone/search.hpp>

#include <json.hpp>

#include <utility>

namespace orthoclone {

using Json = nlohmann::ordered_json;

inline Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json to_json(const DensityMatrix& rho) { return to_json(rho.entries()); }

inline Json to_json(const Spectrum& s) { return Json(s.values()); }

inline Json to_json(const OpenCloneResult& r) {
  Json record = Json::array();
  for (const auto& [label, p] : r.record_distribution) {
    record.push_back(Json{{"label", label}, {"p", p}});
  }
  return Json{{"fidelity", r.fidelity_to_target},
              {"record", std::move(record)},
              {"holevo_bits", r.record_holevo_bits}};
}

inline Json to_json(const SpectrumComparison& c) {
  return Json{{"input_spectrum", to_json(c.input_spectrum)},
              {"output_spectrum", to_json(c.output_spectrum)},
              {"matched", c.matched},
              {"max_pairwise_gap", c.max_pairwise_gap}};
}

inline Json to_json(const ObstructionReport& r) {
  return Json{{"task", task_name(r.task)},
              {"per_input", Json::array({to_json(r.per_input[0]), to_json(r.per_input[1])})},
              {"blocked", r.blocked},
              {"note", r.note}};
}

inline Json to_json(const BlankFeasibility& r) {
  Json witness;  // stays null when infeasible
  if (r.witness_spectrum) witness = Json(*r.witness_spectrum);
  return Json{{"feasible", r.feasible},
              {"witness_spectrum", std::move(witness)},
              {"reason", r.reason}};
}

inline Json to_json(const SearchConfig& cfg) {
  return Json{{"restarts", cfg.restarts},
              {"max_iters", cfg.max_iters},
              {"grad_tol", cfg.grad_tol},
              {"step_tol", cfg.step_tol},
              {"master_seed", cfg.master_seed},
              {"success_threshold", cfg.success_threshold},
              {"exactness_threshold", cfg.exactness_threshold}};
}

// search results carry their full configuration so a report alone is enough
// to reproduce the run
inline Json to_json(const SearchResult& r, const SearchConfig& cfg) {
  Json trace = Json::array();
  for (const TracePoint& t : r.trace) {
    trace.push_back(Json{{"iteration", t.iteration}, {"objective", t.objective}});
  }
  return Json{{"config", to_json(cfg)},
              {"best_objective", r.best_objective},
              {"best_params", Json(r.best_params)},
              {"converged", r.converged},
              {"iterations_used", r.iterations_used},
              {"seed_used", r.seed_used},
              {"verdict", verdict_name(r.verdict)},
              {"trace", std::move(trace)}};
}

}  // namespace orthoclone
